//! The composed recognizer: ingestion → PCA → LDA → kNN, plus the
//! versioned binary model file and an accuracy evaluator.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingestion::{self, ImageVector, LabeledGallery};
use crate::knn::{self, Decision, DistanceReport, Verdict};
use crate::lda::{self, FisherModel};
use crate::linalg::Matrix;
use crate::pca::{self, PcaModel};

pub const MODEL_MAGIC: &[u8; 4] = b"FKM1";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How the rejection threshold is chosen at training time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    None,
    /// margin_factor times the largest leave-one-out genuine min-distance.
    Auto(f64),
    Fixed(f64),
}

/// A retained dimension, either fixed or derived from the gallery
/// (d = p − C for PCA, f = C − 1 for LDA).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Auto,
    Fixed(usize),
}

/// The full trained recognizer: both projection stages, the projected
/// training exemplars, and the classification parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognizerModel {
    pub pca: PcaModel,
    pub fisher: FisherModel,
    /// f x p training images projected through both stages.
    pub exemplars: Matrix,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub k: usize,
    pub threshold: Option<f64>,
    pub width: usize,
    pub height: usize,
    pub format_version: u32,
}

impl RecognizerModel {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn exemplar_count(&self) -> usize {
        self.exemplars.cols()
    }
}

/// Trains a recognizer end to end: PCA on the data matrix, LDA in PCA
/// space, exemplars in Fisher space, optional auto threshold.
pub fn train(
    gallery: &LabeledGallery,
    pca_dim: Dim,
    fisher_dim: Dim,
    k: usize,
    threshold_policy: ThresholdPolicy,
) -> Result<RecognizerModel> {
    let p = gallery.image_count();
    let c = gallery.class_count();
    if k < 1 || k > p {
        return Err(Error::KOutOfRange { k, max: p });
    }
    let d = match pca_dim {
        Dim::Auto => p - c,
        Dim::Fixed(d) => d,
    };
    let f = match fisher_dim {
        Dim::Auto => c - 1,
        Dim::Fixed(f) => f,
    };

    let x = ingestion::data_matrix(gallery);
    let pca_model = pca::fit_pca(&x, d)?;
    let z = pca::project_matrix(&pca_model, &x)?;
    let fisher = lda::fit_lda(&z, &gallery.labels, &gallery.class_names, f)?;

    let mut exemplars = Matrix::zeros(f, p);
    for j in 0..p {
        let projected = lda::project_fisher(&fisher, z.column(j))?;
        exemplars.column_mut(j).copy_from_slice(&projected);
    }

    let threshold = match threshold_policy {
        ThresholdPolicy::None => None,
        ThresholdPolicy::Fixed(value) => Some(value),
        ThresholdPolicy::Auto(margin) => {
            let genuine = leave_one_out_min_distances(&exemplars)?;
            Some(knn::suggest_threshold(&genuine, margin)?)
        }
    };

    Ok(RecognizerModel {
        pca: pca_model,
        fisher,
        exemplars,
        labels: gallery.labels.clone(),
        class_names: gallery.class_names.clone(),
        k,
        threshold,
        width: gallery.width,
        height: gallery.height,
        format_version: MODEL_FORMAT_VERSION,
    })
}

/// For each exemplar, its minimum distance to the remaining exemplars.
pub fn leave_one_out_min_distances(exemplars: &Matrix) -> Result<Vec<f64>> {
    let p = exemplars.cols();
    if p < 2 {
        return Err(Error::EmptyInput {
            context: "leave-one-out distances need at least 2 exemplars",
        });
    }
    let mut out = Vec::with_capacity(p);
    for i in 0..p {
        let mut min = f64::INFINITY;
        for j in 0..p {
            if i != j {
                let d = knn::euclidean_distance(exemplars.column(i), exemplars.column(j))?;
                min = min.min(d);
            }
        }
        out.push(min);
    }
    Ok(out)
}

/// Leave-one-out kNN accuracy over the model's own exemplars; the
/// training summary statistic printed by the CLI.
pub fn leave_one_out_accuracy(model: &RecognizerModel) -> Result<f64> {
    let p = model.exemplar_count();
    if p < 2 {
        return Err(Error::EmptyInput {
            context: "leave-one-out accuracy needs at least 2 exemplars",
        });
    }
    let f = model.exemplars.rows();
    let k = model.k.min(p - 1);
    let mut correct = 0usize;
    for held_out in 0..p {
        let mut rest = Matrix::zeros(f, p - 1);
        let mut labels = Vec::with_capacity(p - 1);
        let mut dst = 0;
        for j in 0..p {
            if j != held_out {
                rest.column_mut(dst).copy_from_slice(model.exemplars.column(j));
                labels.push(model.labels[j]);
                dst += 1;
            }
        }
        let verdict = knn::classify(
            model.exemplars.column(held_out),
            &rest,
            &labels,
            k,
            model.threshold,
        )?;
        if verdict.decision == Decision::Identified(model.labels[held_out]) {
            correct += 1;
        }
    }
    Ok(correct as f64 / p as f64)
}

/// Projects a probe image through both stages and classifies it.
pub fn identify(
    model: &RecognizerModel,
    probe: &ImageVector,
) -> Result<(Verdict, DistanceReport)> {
    if probe.width != model.width || probe.height != model.height {
        return Err(Error::ProbeDimensionMismatch {
            width: probe.width,
            height: probe.height,
            expected_width: model.width,
            expected_height: model.height,
        });
    }
    let z = pca::project(&model.pca, &probe.pixels)?;
    let w = lda::project_fisher(&model.fisher, &z)?;
    let report = knn::distance_report(&w, &model.exemplars)?;
    let verdict = knn::classify(&w, &model.exemplars, &model.labels, model.k, model.threshold)?;
    Ok((verdict, report))
}

/// Per-class and overall identification accuracy on a probe gallery.
#[derive(Debug, Clone)]
pub struct ClassStats {
    pub name: String,
    pub total: usize,
    pub correct: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub per_class: Vec<ClassStats>,
    pub total: usize,
    pub correct: usize,
    pub rejected: usize,
    /// Mean min-distance over probes whose class exists in the model.
    pub mean_genuine_min_distance: f64,
}

impl EvalSummary {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Runs every gallery image through `identify` and tallies the outcomes.
///
/// Probes whose class name is unknown to the model can never be correct;
/// they still count toward totals and rejections.
pub fn evaluate(model: &RecognizerModel, gallery: &LabeledGallery) -> Result<EvalSummary> {
    let mut per_class: Vec<ClassStats> = gallery
        .class_names
        .iter()
        .map(|name| ClassStats {
            name: name.clone(),
            total: 0,
            correct: 0,
            rejected: 0,
        })
        .collect();
    let mut genuine_min_sum = 0.0;
    let mut genuine_count = 0usize;

    for (image, &label) in gallery.images.iter().zip(&gallery.labels) {
        let (verdict, report) = identify(model, image)?;
        let stats = &mut per_class[label];
        stats.total += 1;
        let true_name = &gallery.class_names[label];
        if model.class_names.iter().any(|n| n == true_name) {
            genuine_min_sum += report.min;
            genuine_count += 1;
        }
        match verdict.decision {
            Decision::Identified(predicted) => {
                if model.class_names[predicted] == *true_name {
                    stats.correct += 1;
                }
            }
            Decision::Rejected => stats.rejected += 1,
        }
    }

    let total = per_class.iter().map(|s| s.total).sum();
    let correct = per_class.iter().map(|s| s.correct).sum();
    let rejected = per_class.iter().map(|s| s.rejected).sum();
    Ok(EvalSummary {
        per_class,
        total,
        correct,
        rejected,
        mean_genuine_min_distance: if genuine_count == 0 {
            0.0
        } else {
            genuine_min_sum / genuine_count as f64
        },
    })
}

// ---------------------------------------------------------------------------
// Model file format, little-endian throughout:
//   magic "FKM1"; version u32; width u32; height u32; d u32; f u32; p u32;
//   C u32; k u32; threshold flag u8 (+ f64 if present); class names as C
//   length-prefixed UTF-8 strings; labels as p u32 indices; then f64 arrays:
//   mean (N), pca eigenvalues (d), pca basis (N*d column-major), fisher
//   eigenvalues (f), fisher basis (d*f column-major), class_means (C*f),
//   exemplars (f*p column-major).
// ---------------------------------------------------------------------------

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64_slice(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
    fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

pub fn save_model(model: &RecognizerModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = model.pixel_count();
    let d = model.pca.d;
    let f = model.fisher.fisher_dim();
    let p = model.exemplar_count();
    let c = model.class_names.len();

    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MODEL_MAGIC);
    w.u32(model.format_version);
    w.u32(model.width as u32);
    w.u32(model.height as u32);
    w.u32(d as u32);
    w.u32(f as u32);
    w.u32(p as u32);
    w.u32(c as u32);
    w.u32(model.k as u32);
    match model.threshold {
        Some(t) => {
            w.u8(1);
            w.f64(t);
        }
        None => w.u8(0),
    }
    for name in &model.class_names {
        w.string(name);
    }
    for &label in &model.labels {
        w.u32(label as u32);
    }
    debug_assert_eq!(model.pca.mean.len(), n);
    w.f64_slice(&model.pca.mean);
    w.f64_slice(&model.pca.eigenvalues);
    w.f64_slice(model.pca.basis.data());
    w.f64_slice(&model.fisher.eigenvalues);
    w.f64_slice(model.fisher.basis.data());
    for mean in &model.fisher.class_means {
        w.f64_slice(mean);
    }
    w.f64_slice(model.exemplars.data());

    fs::write(path, &w.buf).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::ModelTruncated {
                path: self.path.to_path_buf(),
                expected: n,
                actual: self.bytes.len() - self.pos,
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::ModelInvariant {
            path: self.path.to_path_buf(),
            detail: "class name is not valid UTF-8".into(),
        })
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RecognizerModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };

    if r.take(4)? != MODEL_MAGIC {
        return Err(Error::ModelBadMagic {
            path: path.to_path_buf(),
        });
    }
    let version = r.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelUnsupportedVersion {
            path: path.to_path_buf(),
            version,
        });
    }
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let d = r.u32()? as usize;
    let f = r.u32()? as usize;
    let p = r.u32()? as usize;
    let c = r.u32()? as usize;
    let k = r.u32()? as usize;
    let threshold = match r.u8()? {
        0 => None,
        1 => Some(r.f64()?),
        other => {
            return Err(Error::ModelInvariant {
                path: path.to_path_buf(),
                detail: format!("threshold flag must be 0 or 1, got {other}"),
            })
        }
    };

    let invariant = |detail: String| Error::ModelInvariant {
        path: path.to_path_buf(),
        detail,
    };
    let n = width * height;
    if n == 0 || d == 0 || f == 0 || p == 0 || c < 2 {
        return Err(invariant(format!(
            "degenerate dimensions: N={n} d={d} f={f} p={p} C={c}"
        )));
    }
    if k < 1 || k > p {
        return Err(invariant(format!("k={k} out of range 1..={p}")));
    }

    let mut class_names = Vec::with_capacity(c);
    for _ in 0..c {
        class_names.push(r.string()?);
    }
    let mut labels = Vec::with_capacity(p);
    for _ in 0..p {
        let label = r.u32()? as usize;
        if label >= c {
            return Err(invariant(format!("label {label} outside class range {c}")));
        }
        labels.push(label);
    }

    let mean = r.f64_vec(n)?;
    let pca_eigenvalues = r.f64_vec(d)?;
    let pca_basis = Matrix::from_column_major(n, d, r.f64_vec(n * d)?)
        .map_err(|e| invariant(format!("pca basis: {e}")))?;
    let fisher_eigenvalues = r.f64_vec(f)?;
    let fisher_basis = Matrix::from_column_major(d, f, r.f64_vec(d * f)?)
        .map_err(|e| invariant(format!("fisher basis: {e}")))?;
    let mut class_means = Vec::with_capacity(c);
    for _ in 0..c {
        class_means.push(r.f64_vec(f)?);
    }
    let exemplars = Matrix::from_column_major(f, p, r.f64_vec(f * p)?)
        .map_err(|e| invariant(format!("exemplars: {e}")))?;

    if r.pos != bytes.len() {
        return Err(invariant(format!(
            "{} trailing bytes after model payload",
            bytes.len() - r.pos
        )));
    }

    Ok(RecognizerModel {
        pca: PcaModel {
            mean,
            basis: pca_basis,
            eigenvalues: pca_eigenvalues,
            d,
        },
        fisher: FisherModel {
            basis: fisher_basis,
            eigenvalues: fisher_eigenvalues,
            class_means,
            class_names: class_names.clone(),
        },
        exemplars,
        labels,
        class_names,
        k,
        threshold,
        width,
        height,
        format_version: version,
    })
}
