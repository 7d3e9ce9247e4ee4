//! Seeded synthetic datasets for desk-scale experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{quantize, Dataset};
use crate::error::{domain, Result};
use crate::tensor::Tensor;

/// Gaussian clusters, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobParams {
    pub n_per_class: usize,
    pub classes: usize,
    pub dim: usize,
    pub spread: f64,
    pub seed: u64,
}

/// Class means sit on the unit circle in the first two coordinates (zero
/// elsewhere); every coordinate gets `spread`-scaled standard normal noise.
/// All values are then mapped by one affine map onto `[0, 1]` and snapped to
/// the `k/255` grid. Images are shaped `(n, 1, 1, dim)`; samples are
/// interleaved by class.
pub fn gen_blobs(p: &BlobParams) -> Result<Dataset> {
    if p.classes < 2 || p.dim < 2 {
        return domain(format!(
            "blobs need at least 2 classes and 2 dimensions, got {} and {}",
            p.classes, p.dim
        ));
    }
    if !(p.spread >= 0.0) {
        return domain(format!("spread must be non-negative, got {}", p.spread));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n_per_class * p.classes;
    let mut raw = Vec::with_capacity(n * p.dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..p.n_per_class {
        for c in 0..p.classes {
            let angle = 2.0 * PI * c as f64 / p.classes as f64;
            for k in 0..p.dim {
                let mean = match k {
                    0 => angle.cos(),
                    1 => angle.sin(),
                    _ => 0.0,
                };
                let z: f64 = StandardNormal.sample(&mut rng);
                raw.push(mean + p.spread * z);
            }
            labels.push(c);
        }
    }
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let data = raw
        .into_iter()
        .map(|v| if span > 0.0 { quantize((v - lo) / span) } else { quantize(0.5) })
        .collect();
    let mut ds = Dataset::new(Tensor::new(vec![n, 1, 1, p.dim], data)?, labels, p.classes)?;
    ds.class_names = Some((0..p.classes).map(|c| format!("blob{c}")).collect());
    Ok(ds)
}

/// Stroke-pattern character images.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphParams {
    pub n_per_class: usize,
    pub classes: usize,
    pub height: usize,
    pub width: usize,
    /// Salt-and-pepper rate.
    pub noise: f64,
    /// Maximum absolute per-axis translation in pixels.
    pub max_shift: usize,
    pub seed: u64,
}

impl GlyphParams {
    pub fn new(n_per_class: usize, classes: usize, height: usize, width: usize, noise: f64, seed: u64) -> Self {
        Self {
            n_per_class,
            classes,
            height,
            width,
            noise,
            max_shift: 2,
            seed,
        }
    }
}

type Segment = ((f64, f64), (f64, f64));

/// Names of the 16 stroke patterns, in class order.
pub const GLYPH_PATTERNS: [&str; 16] = [
    "vbar", "hbar", "backslash", "slash", "plus", "cross", "box", "ring", "ell", "tee",
    "cap", "cup", "twin-v", "twin-h", "triangle", "zed",
];

fn arc(cx: f64, cy: f64, r: f64, from: f64, to: f64, pieces: usize) -> Vec<Segment> {
    (0..pieces)
        .map(|k| {
            let a0 = from + (to - from) * k as f64 / pieces as f64;
            let a1 = from + (to - from) * (k + 1) as f64 / pieces as f64;
            (
                (cx + r * a0.cos(), cy + r * a0.sin()),
                (cx + r * a1.cos(), cy + r * a1.sin()),
            )
        })
        .collect()
}

/// Strokes in unit coordinates `(x, y)`, `y` pointing down.
fn pattern(class: usize) -> Vec<Segment> {
    match class {
        0 => vec![((0.5, 0.0), (0.5, 1.0))],
        1 => vec![((0.0, 0.5), (1.0, 0.5))],
        2 => vec![((0.0, 0.0), (1.0, 1.0))],
        3 => vec![((1.0, 0.0), (0.0, 1.0))],
        4 => vec![((0.5, 0.0), (0.5, 1.0)), ((0.0, 0.5), (1.0, 0.5))],
        5 => vec![((0.0, 0.0), (1.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))],
        6 => vec![
            ((0.0, 0.0), (1.0, 0.0)),
            ((1.0, 0.0), (1.0, 1.0)),
            ((1.0, 1.0), (0.0, 1.0)),
            ((0.0, 1.0), (0.0, 0.0)),
        ],
        7 => arc(0.5, 0.5, 0.5, 0.0, 2.0 * PI, 24),
        8 => vec![((0.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (1.0, 1.0))],
        9 => vec![((0.0, 0.0), (1.0, 0.0)), ((0.5, 0.0), (0.5, 1.0))],
        10 => arc(0.5, 0.8, 0.5, PI, 2.0 * PI, 12),
        11 => arc(0.5, 0.2, 0.5, 0.0, PI, 12),
        12 => vec![((0.2, 0.0), (0.2, 1.0)), ((0.8, 0.0), (0.8, 1.0))],
        13 => vec![((0.0, 0.2), (1.0, 0.2)), ((0.0, 0.8), (1.0, 0.8))],
        14 => vec![
            ((0.5, 0.0), (1.0, 1.0)),
            ((1.0, 1.0), (0.0, 1.0)),
            ((0.0, 1.0), (0.5, 0.0)),
        ],
        15 => vec![
            ((0.0, 0.0), (1.0, 0.0)),
            ((1.0, 0.0), (0.0, 1.0)),
            ((0.0, 1.0), (1.0, 1.0)),
        ],
        _ => unreachable!("pattern index checked by caller"),
    }
}

/// Rasterizes a pattern into an `h × w` binary template inside a 2-pixel margin.
fn render(class: usize, h: usize, w: usize) -> Vec<f64> {
    let mut img = vec![0.0; h * w];
    let (x0, x1) = (2.0, (w - 3) as f64);
    let (y0, y1) = (2.0, (h - 3) as f64);
    for ((ax, ay), (bx, by)) in pattern(class) {
        let (px, py) = (x0 + ax * (x1 - x0), y0 + ay * (y1 - y0));
        let (qx, qy) = (x0 + bx * (x1 - x0), y0 + by * (y1 - y0));
        let steps = (((qx - px).abs().max((qy - py).abs())) * 4.0).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let x = (px + t * (qx - px)).round() as usize;
            let y = (py + t * (qy - py)).round() as usize;
            img[y.min(h - 1) * w + x.min(w - 1)] = 1.0;
        }
    }
    img
}

/// `classes` distinct stroke patterns, each sample translated by up to
/// `max_shift` pixels per axis (zero fill) and hit by salt-and-pepper noise.
/// Images are `(n, 1, height, width)`; samples are interleaved by class.
pub fn gen_glyphs(p: &GlyphParams) -> Result<Dataset> {
    if p.classes == 0 || p.classes > GLYPH_PATTERNS.len() {
        return domain(format!("glyphs support 1 to 16 classes, got {}", p.classes));
    }
    if p.height < 8 || p.width < 8 {
        return domain(format!("glyphs need at least 8x8 pixels, got {}x{}", p.height, p.width));
    }
    if !(0.0..=1.0).contains(&p.noise) {
        return domain(format!("noise rate must be in [0, 1], got {}", p.noise));
    }
    let (h, w) = (p.height, p.width);
    let templates: Vec<Vec<f64>> = (0..p.classes).map(|c| render(c, h, w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n_per_class * p.classes;
    let mut data = Vec::with_capacity(n * h * w);
    let mut labels = Vec::with_capacity(n);
    let s = p.max_shift as i64;
    for _ in 0..p.n_per_class {
        for (c, tpl) in templates.iter().enumerate() {
            let dy = rng.random_range(-s..=s);
            let dx = rng.random_range(-s..=s);
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let (sy, sx) = (y - dy, x - dx);
                    let mut v = if sy >= 0 && sy < h as i64 && sx >= 0 && sx < w as i64 {
                        tpl[sy as usize * w + sx as usize]
                    } else {
                        0.0
                    };
                    if p.noise > 0.0 && rng.random::<f64>() < p.noise {
                        v = if rng.random::<bool>() { 1.0 } else { 0.0 };
                    }
                    data.push(v);
                }
            }
            labels.push(c);
        }
    }
    let mut ds = Dataset::new(Tensor::new(vec![n, 1, h, w], data)?, labels, p.classes)?;
    ds.class_names = Some(GLYPH_PATTERNS[..p.classes].iter().map(|s| s.to_string()).collect());
    Ok(ds)
}
