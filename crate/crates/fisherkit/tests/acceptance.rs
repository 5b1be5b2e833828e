//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fisherkit::ingestion::{self, LabeledGallery};
use fisherkit::knn::{self, Decision};
use fisherkit::lda;
use fisherkit::linalg::{self, Matrix, DEFAULT_TOL};
use fisherkit::pca;
use fisherkit::pipeline::{self, Dim, ThresholdPolicy};
use fisherkit::synth::{self, SynthParams};

fn acceptance_gallery() -> LabeledGallery {
    let dir = tempfile::tempdir().unwrap();
    synth::generate_gallery(dir.path(), &SynthParams::default()).unwrap();
    ingestion::load_gallery(dir.path()).unwrap()
}

fn training_set_accuracy(model: &fisherkit::pipeline::RecognizerModel, gallery: &LabeledGallery) -> (usize, usize, usize) {
    let mut correct = 0;
    let mut ties = 0;
    for (image, &label) in gallery.images.iter().zip(&gallery.labels) {
        let (verdict, _) = pipeline::identify(model, image).unwrap();
        if verdict.tie_broken {
            ties += 1;
        }
        if verdict.decision == Decision::Identified(label) {
            correct += 1;
        }
    }
    (correct, gallery.image_count(), ties)
}

#[test]
fn criterion_01_training_set_identification() {
    let start = Instant::now();
    let gallery = acceptance_gallery();
    for k in [1, 3] {
        let model =
            pipeline::train(&gallery, Dim::Auto, Dim::Auto, k, ThresholdPolicy::None).unwrap();
        let (correct, total, _) = training_set_accuracy(&model, &gallery);
        assert_eq!(
            (correct, total),
            (20, 20),
            "k={k}: training accuracy {correct}/{total}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 1: PASS (20/20 at k=1 and k=3 in {elapsed:?})");
}

#[test]
fn criterion_02_k_sweep() {
    let start = Instant::now();
    let gallery = acceptance_gallery();
    for k in [2, 5, 10] {
        let model =
            pipeline::train(&gallery, Dim::Auto, Dim::Auto, k, ThresholdPolicy::None).unwrap();
        let (correct, total, ties) = training_set_accuracy(&model, &gallery);
        assert_eq!(
            (correct, total),
            (20, 20),
            "k={k}: training accuracy {correct}/{total}"
        );
        println!("criterion 2: k={k}: 20/20, {ties} vote tie(s) resolved by documented rule");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 2: PASS (100% for k in {{2,5,10}} in {elapsed:?})");
}

#[test]
fn criterion_03_fraud_rejection() {
    let start = Instant::now();
    let gallery = acceptance_gallery();
    let model =
        pipeline::train(&gallery, Dim::Auto, Dim::Auto, 3, ThresholdPolicy::Auto(1.5)).unwrap();
    let threshold = model.threshold.unwrap();

    // 20 impostor probes from a disjoint seed
    let impostors = synth::generate_probe_images(&SynthParams {
        seed: 9001,
        ..SynthParams::default()
    });
    assert_eq!(impostors.len(), 20);
    let mut rejected = 0;
    for probe in &impostors {
        let (verdict, _) = pipeline::identify(&model, probe).unwrap();
        if verdict.decision == Decision::Rejected {
            rejected += 1;
        }
    }
    assert_eq!(rejected, 20, "only {rejected}/20 impostors rejected");

    // leave-one-out genuine probes accepted
    let loo = pipeline::leave_one_out_min_distances(&model.exemplars).unwrap();
    let accepted = loo.iter().filter(|&&d| d <= threshold).count();
    assert!(
        accepted as f64 >= 0.9 * loo.len() as f64,
        "only {accepted}/{} genuine probes accepted",
        loo.len()
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 3: PASS (20/20 impostors rejected, {accepted}/{} genuine accepted in {elapsed:?})",
        loo.len()
    );
}

/// PCA the slow way: eigensolve the full N x N covariance directly.
fn fit_via_direct_covariance(x: &Matrix, d: usize) -> (Vec<f64>, Matrix) {
    let n = x.rows();
    let p = x.cols();
    let mut mean = vec![0.0; n];
    for j in 0..p {
        for (m, &v) in mean.iter_mut().zip(x.column(j)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= p as f64;
    }
    let mut centered = x.clone();
    for j in 0..p {
        for (v, m) in centered.column_mut(j).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let cov = linalg::matmul(&centered, &centered.transpose()).unwrap();
    let eigen = linalg::symmetric_eigen(&cov, DEFAULT_TOL).unwrap();
    let mut basis = Matrix::zeros(n, d);
    for j in 0..d {
        basis.column_mut(j).copy_from_slice(eigen.vectors.column(j));
    }
    (eigen.values[..d].to_vec(), basis)
}

#[test]
fn criterion_04_gram_trick_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..100 {
        let p = rng.gen_range(3..=10usize);
        let n = rng.gen_range(p + 1..=30usize);
        let d = rng.gen_range(1..=p - 1);
        let data: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Matrix::from_column_major(n, p, data).unwrap();

        let model = pca::fit_pca(&x, d).unwrap();
        let (direct_values, direct_basis) = fit_via_direct_covariance(&x, d);

        for j in 0..d {
            let rel = (model.eigenvalues[j] - direct_values[j]).abs()
                / direct_values[j].abs().max(1e-30);
            assert!(rel <= 1e-8, "trial {trial} eigenvalue {j}: rel error {rel:e}");
            let dot: f64 = model
                .basis
                .column(j)
                .iter()
                .zip(direct_basis.column(j))
                .map(|(a, b)| a * b)
                .sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            let max_dev = model
                .basis
                .column(j)
                .iter()
                .zip(direct_basis.column(j))
                .map(|(a, b)| (a - sign * b).abs())
                .fold(0.0, f64::max);
            assert!(max_dev <= 1e-7, "trial {trial} basis col {j}: dev {max_dev:e}");
        }
    }
    println!("criterion 4: PASS (100 Gram-trick instances match direct covariance)");
}

#[test]
fn criterion_05_eigensolver_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..500 {
        let n = rng.gen_range(2..=20usize);
        let mut a = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = rng.gen_range(-1.0..1.0);
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let norm = a.frobenius_norm();
        let e = linalg::symmetric_eigen(&a, DEFAULT_TOL).unwrap();

        let mut lambda = Matrix::zeros(n, n);
        for i in 0..n {
            lambda.set(i, i, e.values[i]);
        }
        let recon = linalg::matmul(
            &linalg::matmul(&e.vectors, &lambda).unwrap(),
            &e.vectors.transpose(),
        )
        .unwrap();
        let dev = recon.sub(&a).unwrap().max_abs();
        assert!(dev <= 1e-8 * norm, "trial {trial}: reconstruction dev {dev:e}");

        let gram = linalg::matmul(&e.vectors.transpose(), &e.vectors).unwrap();
        let ortho = gram.sub(&Matrix::identity(n)).unwrap().max_abs();
        assert!(ortho <= 1e-9, "trial {trial}: orthonormality dev {ortho:e}");

        let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let sum: f64 = e.values.iter().sum();
        assert!(
            (trace - sum).abs() <= 1e-9 * trace.abs().max(1.0),
            "trial {trial}: trace mismatch"
        );
    }
    println!("criterion 5: PASS (500 symmetric eigensolves within tolerance)");
}

#[test]
fn criterion_06_scatter_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..200 {
        let d = rng.gen_range(2..=6usize);
        let c = rng.gen_range(2..=5usize);
        let p = rng.gen_range((d + c).max(2 * c)..=30usize);
        let data: Vec<f64> = (0..d * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = Matrix::from_column_major(d, p, data).unwrap();
        let mut labels: Vec<usize> = (0..p).map(|i| i % c).collect();
        for i in 0..p {
            let j = rng.gen_range(i..p);
            labels.swap(i, j);
        }

        let s_w = lda::within_class_scatter(&z, &labels).unwrap();
        let s_b = lda::between_class_scatter(&z, &labels).unwrap();

        // total scatter about the grand mean
        let mut mean = vec![0.0; d];
        for j in 0..p {
            for (m, &v) in mean.iter_mut().zip(z.column(j)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= p as f64;
        }
        let mut total = Matrix::zeros(d, d);
        for j in 0..p {
            for a in 0..d {
                for b in 0..d {
                    total.set(
                        a,
                        b,
                        total.get(a, b) + (z.get(a, j) - mean[a]) * (z.get(b, j) - mean[b]),
                    );
                }
            }
        }
        let sum = s_w.add(&s_b).unwrap();
        let dev = sum.sub(&total).unwrap().max_abs();
        assert!(
            dev <= 1e-9 * total.frobenius_norm(),
            "trial {trial}: decomposition dev {dev:e}"
        );

        let eigen = linalg::generalized_symmetric_eigen(&s_b, &s_w, DEFAULT_TOL).unwrap();
        for j in 0..d {
            let w: Vec<f64> = eigen.vectors.column(j).to_vec();
            let lhs = linalg::matvec(&s_b, &w).unwrap();
            let rhs = linalg::matvec(&s_w, &w).unwrap();
            let res: f64 = lhs
                .iter()
                .zip(&rhs)
                .map(|(l, r)| (l - eigen.values[j] * r).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(
                res <= 1e-8 * s_b.frobenius_norm(),
                "trial {trial} pair {j}: residual {res:e}"
            );
        }
    }
    println!("criterion 6: PASS (200 scatter decompositions and generalized residuals)");
}

/// Naive kNN: full sort of (distance, index), then the same documented
/// tie rules, written independently of the library path.
fn naive_classify(probe: &[f64], exemplars: &Matrix, labels: &[usize], k: usize) -> usize {
    let p = exemplars.cols();
    let mut pairs: Vec<(f64, usize)> = (0..p)
        .map(|j| {
            let mut sum = 0.0;
            for (a, b) in probe.iter().zip(exemplars.column(j)) {
                sum += (a - b) * (a - b);
            }
            (sum.sqrt(), j)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let neighbors = &pairs[..k];
    let classes = labels.iter().copied().max().unwrap() + 1;
    let mut counts = vec![0usize; classes];
    for &(_, j) in neighbors {
        counts[labels[j]] += 1;
    }
    let top = *counts.iter().max().unwrap();
    let tied: Vec<usize> = (0..classes).filter(|&c| counts[c] == top).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    let mut winner = usize::MAX;
    let mut best = f64::INFINITY;
    for &c in &tied {
        let class_best = neighbors
            .iter()
            .filter(|&&(_, j)| labels[j] == c)
            .map(|&(d, _)| d)
            .fold(f64::INFINITY, f64::min);
        if class_best < best || (class_best == best && c < winner) {
            best = class_best;
            winner = c;
        }
    }
    winner
}

#[test]
fn criterion_07_knn_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut probes_done = 0;
    while probes_done < 1000 {
        let p = rng.gen_range(3..=50usize);
        let dim = rng.gen_range(1..=4usize);
        let classes = rng.gen_range(2..=4usize);
        let data: Vec<f64> = (0..dim * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let exemplars = Matrix::from_column_major(dim, p, data).unwrap();
        let labels: Vec<usize> = (0..p).map(|_| rng.gen_range(0..classes)).collect();
        for _ in 0..5 {
            let probe: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for k in 1..=p {
                let verdict = knn::classify(&probe, &exemplars, &labels, k, None).unwrap();
                let expected = naive_classify(&probe, &exemplars, &labels, k);
                assert_eq!(
                    verdict.decision,
                    Decision::Identified(expected),
                    "p={p} k={k}"
                );
            }
            probes_done += 1;
        }
    }
    println!("criterion 7: PASS (classify matches full-sort oracle on {probes_done} probes, all k)");
}

fn nearest_class_mean_accuracy(points: &Matrix, labels: &[usize], classes: usize) -> f64 {
    let d = points.rows();
    let p = points.cols();
    let mut means = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for (j, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        for (m, &v) in means[label].iter_mut().zip(points.column(j)) {
            *m += v;
        }
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        for m in mean.iter_mut() {
            *m /= count as f64;
        }
    }
    let mut correct = 0;
    for (j, &label) in labels.iter().enumerate() {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (c, mean) in means.iter().enumerate() {
            let dist = knn::euclidean_distance(points.column(j), mean).unwrap();
            if dist < best_dist {
                best_dist = dist;
                best = c;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    correct as f64 / p as f64
}

#[test]
fn criterion_08_lda_improves_or_matches() {
    let gallery = acceptance_gallery();
    let x = ingestion::data_matrix(&gallery);
    let p = gallery.image_count();
    let c = gallery.class_count();
    let pca_model = pca::fit_pca(&x, p - c).unwrap();
    let z = pca::project_matrix(&pca_model, &x).unwrap();
    let fisher = lda::fit_lda(&z, &gallery.labels, &gallery.class_names, c - 1).unwrap();
    let mut fisher_points = Matrix::zeros(c - 1, p);
    for j in 0..p {
        let w = lda::project_fisher(&fisher, z.column(j)).unwrap();
        fisher_points.column_mut(j).copy_from_slice(&w);
    }
    let pca_accuracy = nearest_class_mean_accuracy(&z, &gallery.labels, c);
    let fisher_accuracy = nearest_class_mean_accuracy(&fisher_points, &gallery.labels, c);
    assert!(
        fisher_accuracy >= pca_accuracy,
        "fisher {fisher_accuracy} < pca {pca_accuracy}"
    );
    println!(
        "criterion 8: PASS (nearest-class-mean accuracy fisher {fisher_accuracy:.3} >= pca {pca_accuracy:.3})"
    );
}

#[test]
fn criterion_09_serialization_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut count = 0;
    for seed in 0..25u64 {
        let gallery_dir = dir.path().join(format!("g{seed}"));
        let params = SynthParams {
            classes: 2 + (seed % 3) as usize,
            per_class: 2 + (seed % 2) as usize,
            width: 8,
            height: 8,
            seed: 1000 + seed,
        };
        synth::generate_gallery(&gallery_dir, &params).unwrap();
        let gallery = ingestion::load_gallery(&gallery_dir).unwrap();
        for policy in [ThresholdPolicy::None, ThresholdPolicy::Auto(1.5)] {
            let model = pipeline::train(&gallery, Dim::Auto, Dim::Auto, 1, policy).unwrap();
            let path = dir.path().join(format!("m{count}.fkm"));
            pipeline::save_model(&model, &path).unwrap();
            let loaded = pipeline::load_model(&path).unwrap();
            assert_eq!(model, loaded, "model {count} did not round-trip bit-exactly");
            count += 1;
        }
    }
    assert_eq!(count, 50);
    println!("criterion 9: PASS (50 models round-trip bit-exactly)");
}

#[test]
fn criterion_10_hand_computed_lda_case() {
    let z = Matrix::from_column_major(1, 4, vec![1.0, 2.0, 4.0, 5.0]).unwrap();
    let labels = vec![0, 0, 1, 1];
    let s_w = lda::within_class_scatter(&z, &labels).unwrap();
    let s_b = lda::between_class_scatter(&z, &labels).unwrap();
    assert!((s_w.get(0, 0) - 1.0).abs() <= 1e-12);
    assert!((s_b.get(0, 0) - 9.0).abs() <= 1e-12);
    let names = vec!["a".to_string(), "b".to_string()];
    let model = lda::fit_lda(&z, &labels, &names, 1).unwrap();
    assert!((model.eigenvalues[0] - 9.0).abs() <= 1e-12);
    println!("criterion 10: PASS (S_W = 1, S_B = 9, lambda = 9 within 1e-12)");
}
