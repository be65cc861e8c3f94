//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "layerup.h"

int main(void) {
    double px[16 * 16];
    for (int i = 0; i < 16 * 16; i++) px[i] = (i % 16) < 8 ? 0.2 : 0.8;
    LayerupImage *img = NULL, *out = NULL;
    LayerupConfig *cfg = NULL;
    if (layerup_image_from_data(16, 16, 1, px, 256, &img) != LAYERUP_STATUS_OK) return 1;
    if (layerup_config_new(2.0, &cfg) != LAYERUP_STATUS_OK) return 2;
    if (layerup_upscale(img, cfg, &out) != LAYERUP_STATUS_OK) return 3;
    size_t w = 0, h = 0, c = 0;
    layerup_image_dims(out, &w, &h, &c);
    double ssim = 0.0;
    layerup_ssim(out, out, &ssim);
    if (layerup_config_new(-1.0, &cfg) != LAYERUP_STATUS_INVALID_ARGUMENT) return 4;
    printf("%zux%zux%zu ssim=%.1f err=%s\n", w, h, c, ssim, layerup_last_error() ? "set" : "none");
    layerup_image_free(out);
    layerup_image_free(img);
    layerup_config_free(cfg);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipping");
        return;
    }
    // target/<profile>/deps/<this test> -> target/<profile>/liblayerup_ffi.a
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = lib_dir.join("liblayerup_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "32x32x1 ssim=1.0 err=set\n");
}
