//! Deterministic synthetic gallery generator.
//!
//! Each class gets a distinct smooth base pattern drawn from the seed (a
//! sum of 2-D cosines with random frequencies and phases); each image is
//! the base plus a small per-pixel perturbation. The same seed always
//! produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingestion::{write_pgm, ImageVector};

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub classes: usize,
    pub per_class: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            classes: 5,
            per_class: 4,
            width: 16,
            height: 16,
            seed: 42,
        }
    }
}

const COMPONENTS: usize = 3;
const NOISE_AMPLITUDE: f64 = 0.03;

struct BasePattern {
    freq_x: [f64; COMPONENTS],
    freq_y: [f64; COMPONENTS],
    phase: [f64; COMPONENTS],
    amplitude: [f64; COMPONENTS],
}

impl BasePattern {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut pattern = BasePattern {
            freq_x: [0.0; COMPONENTS],
            freq_y: [0.0; COMPONENTS],
            phase: [0.0; COMPONENTS],
            amplitude: [0.0; COMPONENTS],
        };
        for i in 0..COMPONENTS {
            pattern.freq_x[i] = rng.gen_range(0.5..3.0);
            pattern.freq_y[i] = rng.gen_range(0.5..3.0);
            pattern.phase[i] = rng.gen_range(0.0..std::f64::consts::TAU);
            pattern.amplitude[i] = rng.gen_range(0.08..0.15);
        }
        pattern
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        let mut v = 0.5;
        for i in 0..COMPONENTS {
            v += self.amplitude[i]
                * (std::f64::consts::TAU * (self.freq_x[i] * x + self.freq_y[i] * y)
                    + self.phase[i])
                    .cos();
        }
        v
    }
}

/// Generates one image of a class: its base pattern plus small noise.
fn render_image(
    pattern: &BasePattern,
    width: usize,
    height: usize,
    rng: &mut ChaCha8Rng,
) -> ImageVector {
    let mut pixels = vec![0.0; width * height];
    for col in 0..width {
        for row in 0..height {
            let x = col as f64 / width as f64;
            let y = row as f64 / height as f64;
            let noise = rng.gen_range(-NOISE_AMPLITUDE..NOISE_AMPLITUDE);
            pixels[col * height + row] = (pattern.value(x, y) + noise).clamp(0.0, 1.0);
        }
    }
    ImageVector {
        pixels,
        width,
        height,
        source_path: PathBuf::new(),
    }
}

/// Writes a complete gallery under `out_dir`, one subdirectory per class
/// (`class00`, `class01`, ...), images named `img00.pgm`, `img01.pgm`, ...
pub fn generate_gallery(out_dir: impl AsRef<Path>, params: &SynthParams) -> Result<()> {
    let out_dir = out_dir.as_ref();
    assert!(params.classes >= 1 && params.per_class >= 1);
    assert!(params.width >= 1 && params.height >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for class in 0..params.classes {
        let class_dir = out_dir.join(format!("class{class:02}"));
        fs::create_dir_all(&class_dir).map_err(|e| Error::io(&class_dir, e))?;
        let pattern = BasePattern::draw(&mut rng);
        for image in 0..params.per_class {
            let rendered = render_image(&pattern, params.width, params.height, &mut rng);
            write_pgm(&rendered, class_dir.join(format!("img{image:02}.pgm")))?;
        }
    }
    Ok(())
}

/// Renders probe images without touching the filesystem; used for
/// impostor generation in tests and nothing else writes here.
pub fn generate_probe_images(params: &SynthParams) -> Vec<ImageVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Vec::with_capacity(params.classes * params.per_class);
    for _ in 0..params.classes {
        let pattern = BasePattern::draw(&mut rng);
        for _ in 0..params.per_class {
            out.push(render_image(&pattern, params.width, params.height, &mut rng));
        }
    }
    out
}
