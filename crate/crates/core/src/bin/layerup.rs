use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use layerup::bench::{bench_search, geometric_sizes, BenchOptions};
use layerup::config::load_config;
use layerup::{
    load_image, save_image, to_ycbcr, upscale_observed, wls_decompose, Error, Image, PipelineConfig, QualityReport,
    SearchConfig, SearchMode, StepArtifacts, WlsConfig,
};

#[derive(Parser)]
#[command(name = "layerup", version, about = "Single-image upsampling by layer decomposition")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upscale one or more images.
    Upscale(UpscaleArgs),
    /// Split an image (its luma, if colour) into edge and detail layers.
    Decompose(DecomposeArgs),
    /// Print PSNR and SSIM of a test image against a reference.
    Metrics {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Time patch search against image size.
    Bench {
        #[arg(long, default_value_t = 4096)]
        min_size: usize,
        #[arg(long, default_value_t = 65536)]
        max_size: usize,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        /// Skip the full synthesis timing column.
        #[arg(long)]
        no_synthesis: bool,
    },
}

#[derive(Args)]
struct UpscaleArgs {
    /// Input image; repeat together with --output for several files.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long, required = true)]
    output: Vec<PathBuf>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long)]
    step_factor: Option<f64>,
    #[arg(long)]
    mask_quantile: Option<f64>,
    #[arg(long)]
    exact_search: bool,
    /// key = value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write every intermediate image of every step into this directory.
    #[arg(long)]
    dump_intermediates: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_edge: PathBuf,
    /// Detail layer, offset by +0.5 so that zero maps to mid-gray.
    #[arg(long)]
    out_detail: PathBuf,
    #[arg(long)]
    wls_lambda: Option<f64>,
    #[arg(long)]
    wls_alpha: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("layerup: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Upscale(args) => run_upscale(args),
        Command::Decompose(args) => run_decompose(args),
        Command::Metrics { reference, test } => run_metrics(&reference, &test),
        Command::Bench { min_size, max_size, steps, no_synthesis } => {
            run_bench(min_size, max_size, steps, !no_synthesis)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("layerup: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', " ")
}

fn pipeline_config(args: &UpscaleArgs) -> layerup::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &args.config {
        load_config(path, &mut cfg)?;
    }
    if let Some(v) = args.factor {
        cfg.total_factor = v;
    }
    if let Some(v) = args.beta {
        cfg.curve.beta = v;
    }
    if let Some(v) = args.step_factor {
        cfg.step_factor = v;
    }
    if let Some(v) = args.mask_quantile {
        cfg.mask_quantile = v;
    }
    let search: &mut SearchConfig = cfg.search_mut();
    if let Some(v) = args.lambda {
        search.lambda = v;
    }
    if let Some(v) = args.patch_size {
        search.patch_size = v;
    }
    if let Some(v) = args.neighbors {
        search.k = v;
    }
    if args.exact_search {
        search.mode = SearchMode::ExactBruteForce;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_upscale(args: UpscaleArgs) -> layerup::Result<()> {
    if args.input.len() != args.output.len() {
        return Err(Error::InvalidParameter(format!(
            "{} --input but {} --output",
            args.input.len(),
            args.output.len()
        )));
    }
    let cfg = pipeline_config(&args)?;
    let dump = args.dump_intermediates.as_deref();
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    let several = args.input.len() > 1;
    args.input.par_iter().zip(&args.output).try_for_each(|(input, output)| {
        let img = load_image(input)?;
        let prefix = if several {
            input.file_stem().map(|s| format!("{}_", s.to_string_lossy())).unwrap_or_default()
        } else {
            String::new()
        };
        let mut dump_err = None;
        let out = upscale_observed(&img, &cfg, &mut |a| {
            if let (Some(dir), None) = (dump, &dump_err) {
                dump_err = dump_step(dir, &prefix, a).err();
            }
        })?;
        if let Some(e) = dump_err {
            return Err(e);
        }
        save_image(&out, output)
    })
}

fn dump_step(dir: &Path, prefix: &str, a: &StepArtifacts) -> layerup::Result<()> {
    let save = |name: &str, img: &Image| save_image(img, dir.join(format!("{prefix}step{:02}_{name}.png", a.step)));
    save("upsampled", &a.upsampled)?;
    save("synthesized", &a.synthesized)?;
    let (_, vmax) = a.variance.min_max();
    let scale = if vmax > 0.0 { 1.0 / vmax } else { 0.0 };
    save("variance", &a.variance.map(|v| v * scale))?;
    if let Some(m) = &a.alpha {
        save("alpha", m)?;
    }
    if let Some(e) = &a.edge {
        save("edge", e)?;
    }
    if let Some(d) = &a.detail {
        save("detail", &detail_view(d))?;
    }
    if let Some(d) = &a.enhanced_detail {
        save("enhanced_detail", &detail_view(d))?;
    }
    save("result", &a.result)
}

fn detail_view(d: &Image) -> Image {
    d.map(|v| v + 0.5)
}

fn run_decompose(args: DecomposeArgs) -> layerup::Result<()> {
    let img = load_image(&args.input)?;
    let img = if img.channels() == 3 { to_ycbcr(&img)?.luma } else { img };
    let mut cfg = WlsConfig::default();
    if let Some(v) = args.wls_lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.wls_alpha {
        cfg.alpha = v;
    }
    let layers = wls_decompose(&img, &cfg)?;
    save_image(&layers.edge, &args.out_edge)?;
    save_image(&detail_view(&layers.detail), &args.out_detail)
}

fn run_metrics(reference: &Path, test: &Path) -> layerup::Result<()> {
    let report = QualityReport::compare(&load_image(reference)?, &load_image(test)?)?;
    println!("{report}");
    Ok(())
}

fn run_bench(min: usize, max: usize, steps: usize, synthesis: bool) -> layerup::Result<()> {
    let sizes = geometric_sizes(min, max, steps)?;
    let opts = BenchOptions { synthesis, ..BenchOptions::default() };
    let report = bench_search(&sizes, &SearchConfig::default(), &opts)?;
    print!("{report}");
    Ok(())
}
