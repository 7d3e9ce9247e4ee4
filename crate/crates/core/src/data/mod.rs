//! Labelled image datasets, their on-disk formats, and synthetic generators.

mod csv;
mod generators;
mod icrd;

pub use self::csv::{load_csv_dataset, parse_csv_dataset};
pub use generators::{gen_blobs, gen_glyphs, BlobParams, GlyphParams, GLYPH_PATTERNS};
pub use icrd::{decode_icrd, encode_icrd, load_icrd, save_icrd, ICRD_MAGIC};

use crate::error::{domain, Result};
use crate::tensor::Tensor;

/// Images `(n, channels, h, w)` with values in `[0, 1]` and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Tensor,
    pub labels: Vec<usize>,
    pub class_count: usize,
    pub class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(images: Tensor, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let ds = Self {
            images,
            labels,
            class_count,
            class_names: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Checks shape, label range and pixel range.
    pub fn validate(&self) -> Result<()> {
        if self.images.rank() != 4 {
            return domain(format!(
                "dataset images must be (n, channels, h, w), got {:?}",
                self.images.shape()
            ));
        }
        if self.images.batch() != self.labels.len() {
            return domain(format!(
                "{} images but {} labels",
                self.images.batch(),
                self.labels.len()
            ));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.class_count) {
            return domain(format!("label {bad} out of range for {} classes", self.class_count));
        }
        if let Some(v) = self.images.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return domain(format!("pixel value {v} outside [0, 1]"));
        }
        if let Some(names) = &self.class_names {
            if names.len() != self.class_count {
                return domain("class name count differs from class count");
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(channels, h, w)`.
    pub fn sample_shape(&self) -> Vec<usize> {
        self.images.shape()[1..].to_vec()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            images: self.images.gather_batch(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        })
    }

    /// Samples per class.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.class_count];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// `[len, class_count]` one-hot targets for the given rows.
    pub fn one_hot_rows(&self, indices: &[usize]) -> Tensor {
        let c = self.class_count;
        let mut t = Tensor::zeros(&[indices.len(), c]);
        for (r, &i) in indices.iter().enumerate() {
            t.data_mut()[r * c + self.labels[i]] = 1.0;
        }
        t
    }
}

/// `C`-vector with a 1 at `label`.
pub fn one_hot(label: usize, classes: usize) -> Result<Vec<f64>> {
    if label >= classes {
        return domain(format!("label {label} out of range for {classes} classes"));
    }
    let mut v = vec![0.0; classes];
    v[label] = 1.0;
    Ok(v)
}

/// Nearest `k/255` grid value, so that in-memory data matches what the
/// byte-per-pixel container stores.
pub(crate) fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}
