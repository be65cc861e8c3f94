use crate::error::{Error, Result};
use crate::image::Image;

/// An `r × r` block of a single-channel image.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    /// Side length `r`.
    pub size: usize,
    /// Top-left pixel of the block in its source image.
    pub origin: (usize, usize),
    /// Center pixel, normalized by image width and height: `((cx + 0.5) / w, (cy + 0.5) / h)`.
    pub location: (f64, f64),
    /// Row-major block values.
    pub values: Vec<f64>,
    pub dc: f64,
    /// `values - dc`.
    pub ac: Vec<f64>,
}

impl Patch {
    pub fn extract(img: &Image, x0: usize, y0: usize, size: usize) -> Patch {
        let mut values = Vec::with_capacity(size * size);
        for y in y0..y0 + size {
            values.extend_from_slice(&img.data()[y * img.width() + x0..y * img.width() + x0 + size]);
        }
        let dc = values.iter().sum::<f64>() / values.len() as f64;
        let ac = values.iter().map(|v| v - dc).collect();
        let half = (size / 2) as f64;
        Patch {
            size,
            origin: (x0, y0),
            location: ((x0 as f64 + half + 0.5) / img.width() as f64, (y0 as f64 + half + 0.5) / img.height() as f64),
            values,
            dc,
            ac,
        }
    }
}

/// Number of `size × size` patches in a `width × height` image.
pub fn patch_count(width: usize, height: usize, size: usize) -> usize {
    if width < size || height < size {
        0
    } else {
        (width - size + 1) * (height - size + 1)
    }
}

pub(crate) fn check_patchable(img: &Image, size: usize) -> Result<()> {
    img.expect_gray()?;
    if size == 0 || img.width() < size || img.height() < size {
        return Err(Error::ImageTooSmall { width: img.width(), height: img.height(), size });
    }
    Ok(())
}

/// All overlapping `size × size` patches in row-major order of their origins.
pub fn patch_transform(img: &Image, size: usize) -> Result<Vec<Patch>> {
    check_patchable(img, size)?;
    let (nx, ny) = (img.width() - size + 1, img.height() - size + 1);
    let mut out = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        for x in 0..nx {
            out.push(Patch::extract(img, x, y, size));
        }
    }
    Ok(out)
}

/// Inverse patch transform: every pixel becomes the mean of the patch values
/// covering it.
///
/// The mean is taken relative to the first covering value, so a pixel whose
/// covers all agree is reproduced bit-exactly.
pub fn synthesize_mean(patches: &[Patch], width: usize, height: usize) -> Result<Image> {
    let n = width * height;
    let mut reference = vec![f64::NAN; n];
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for p in patches {
        let (x0, y0) = p.origin;
        if p.values.len() != p.size * p.size || x0 + p.size > width || y0 + p.size > height {
            return Err(Error::mismatch(format!(
                "patch at ({x0}, {y0}) of size {} does not fit {width}x{height}",
                p.size
            )));
        }
        for dy in 0..p.size {
            for dx in 0..p.size {
                let i = (y0 + dy) * width + x0 + dx;
                let v = p.values[dy * p.size + dx];
                if count[i] == 0 {
                    reference[i] = v;
                }
                sum[i] += v - reference[i];
                count[i] += 1;
            }
        }
    }
    if let Some(i) = count.iter().position(|&c| c == 0) {
        return Err(Error::IncompleteCover { x: i % width, y: i / width });
    }
    let data = (0..n).map(|i| reference[i] + sum[i] / count[i] as f64).collect();
    Image::from_vec(width, height, 1, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(w, h, |_, _| rng.gen()).unwrap()
    }

    #[test]
    fn single_patch_centered() {
        let img = random(5, 5, 1);
        let patches = patch_transform(&img, 5).unwrap();
        assert_eq!(patches.len(), 1);
        assert_eq!(patches[0].location, (0.5, 0.5));
        assert_eq!(synthesize_mean(&patches, 5, 5).unwrap(), img);
    }

    #[test]
    fn counts_and_order() {
        let img = random(8, 8, 2);
        let patches = patch_transform(&img, 5).unwrap();
        assert_eq!(patches.len(), 16);
        assert_eq!(patches[1].origin, (1, 0));
        assert_eq!(patches[4].origin, (0, 1));
        assert_eq!(patch_count(8, 8, 5), 16);
    }

    #[test]
    fn constant_image_has_no_ac() {
        let img = Image::filled(7, 6, 0.3).unwrap();
        for p in patch_transform(&img, 3).unwrap() {
            assert!(p.ac.iter().all(|&a| a.abs() < 1e-15));
            assert!((p.dc - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn ac_is_zero_mean() {
        for p in patch_transform(&random(9, 9, 3), 5).unwrap() {
            let mean: f64 = p.ac.iter().sum::<f64>() / 25.0;
            assert!(mean.abs() < 1e-12);
            for (v, a) in p.values.iter().zip(&p.ac) {
                assert!((v - (a + p.dc)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perturbed_patch_averages_covers() {
        let (w, h, r) = (6, 6, 3);
        let img = random(w, h, 4);
        let mut patches = patch_transform(&img, r).unwrap();
        patches[5].values[4] += 0.25;
        let out = synthesize_mean(&patches, w, h).unwrap();
        // Direct per-pixel averaging.
        for y in 0..h {
            for x in 0..w {
                let covers: Vec<f64> = patches
                    .iter()
                    .filter(|p| (p.origin.0..p.origin.0 + r).contains(&x) && (p.origin.1..p.origin.1 + r).contains(&y))
                    .map(|p| p.values[(y - p.origin.1) * r + x - p.origin.0])
                    .collect();
                let mean = covers.iter().sum::<f64>() / covers.len() as f64;
                assert!((out.get(x, y) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn errors() {
        let img = random(4, 8, 5);
        assert!(matches!(patch_transform(&img, 5), Err(Error::ImageTooSmall { .. })));
        let mut patches = patch_transform(&random(6, 6, 6), 3).unwrap();
        patches.remove(0);
        assert!(matches!(synthesize_mean(&patches, 6, 6), Err(Error::IncompleteCover { x: 0, y: 0 })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn transform_is_invertible(w in 3usize..12, h in 3usize..12, seed: u64) {
                let img = random(w, h, seed);
                let back = synthesize_mean(&patch_transform(&img, 3).unwrap(), w, h).unwrap();
                prop_assert_eq!(back, img);
            }
        }
    }
}
