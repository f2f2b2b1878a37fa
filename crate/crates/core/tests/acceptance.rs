//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ima_lab::contrast::{hadamard_gap_upper_bound, local_ima_contrast, offdiag_coherence};
use ima_lab::distributions::{
    sample_factorial, FactorialDistribution, SphericalSampler, UnivariateLaw,
};
use ima_lab::error::Error;
use ima_lab::experiments::{
    concentration_sweep, genericity_experiment, reparam_invariance_check, spurious_gap_experiment,
    GenericityConfig, SpuriousConfig, SweepConfig,
};
use ima_lab::linalg::{permutation_matrix, random_orthonormal, rotation_2d, DenseMatrix};
use ima_lab::mixing::{
    injectivity_probe, jacobian_fd, make_two_piece, sample_grid_map, ConformalMap,
    ConformalPrimitive, LinearMap, MixingMap, MonotoneTransform,
};
use ima_lab::mpa::{
    darmois_build, darmois_jacobian, gaussian_conditional_cdf, mpa_forward, mpa_jacobian,
    DensitySpec, RotatedGaussianMPA, DEFAULT_RESOLUTION,
};
use ima_lab::seeding::{mix_path, mix_seed, rng_from_seed};
use ima_lab::stats::{
    binomial_stderr, chi_square_critical_1pct, chi_square_uniform_2d, ks_one_sample,
    ks_one_sample_critical_1pct, nondecreasing_within_2sigma,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn gaussian_matrix<R: Rng>(rng: &mut R, m: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, d, |_, _| rng.sample(StandardNormal))
}

fn dense(m: DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::new(m).expect("finite entries")
}

fn contrast(m: &DMatrix<f64>) -> Result<f64, String> {
    local_ima_contrast(&dense(m.clone()))
        .map(|c| c.value())
        .map_err(|e| e.to_string())
}

/// One corpus entry: `m ∈ [2, 64]`, `d ≤ min(m, 8)`. A third are Gaussian,
/// a third have exactly orthogonal columns, a third are orthogonal columns
/// plus a Gaussian perturbation of size `10^U(−12, −2)`.
fn corpus(n: usize) -> Vec<DMatrix<f64>> {
    let mut rng = rng_from_seed(mix_seed(SEED, 1));
    (0..n)
        .map(|i| {
            let m = rng.random_range(2..=64);
            let d = rng.random_range(1..=m.min(8));
            match i % 3 {
                0 => gaussian_matrix(&mut rng, m, d),
                kind => {
                    let q = random_orthonormal(&mut rng, m, d);
                    let scale = DVector::from_fn(d, |_, _| 10f64.powf(rng.random_range(-1.0..1.0)));
                    let base = q.as_dmatrix() * DMatrix::from_diagonal(&scale);
                    if kind == 1 {
                        base
                    } else {
                        let eta = 10f64.powf(rng.random_range(-12.0..-2.0));
                        &base + gaussian_matrix(&mut rng, m, d) * eta
                    }
                }
            }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(mix_seed(SEED, 2));
    let (mut worst_left, mut worst_right) = (0f64, 0f64);
    let (mut zero_cases, mut orthogonal_cases) = (0, 0);
    for (i, j) in corpus(10_000).iter().enumerate() {
        let (m, d) = j.shape();
        let c = contrast(j)?;
        ensure(c >= 0.0, || format!("entry {i}: negative contrast {c}"))?;

        let q = random_orthonormal(&mut rng, m, m);
        worst_left = worst_left.max((contrast(&(q.as_dmatrix() * j))? - c).abs());

        let mut perm: Vec<usize> = (0..d).collect();
        for k in (1..d).rev() {
            perm.swap(k, rng.random_range(0..=k));
        }
        let p = permutation_matrix(&perm).map_err(|e| e.to_string())?;
        let diag = DVector::from_fn(d, |_, _| rng.random_range(0.1..10.0));
        let jpd = j * p.as_dmatrix() * DMatrix::from_diagonal(&diag);
        worst_right = worst_right.max((contrast(&jpd)? - c).abs());

        let coherence = offdiag_coherence(&dense(j.clone())).map_err(|e| e.to_string())?;
        if c <= 1e-10 {
            zero_cases += 1;
            ensure(coherence <= 1e-4, || {
                format!("entry {i}: contrast {c:e} but coherence {coherence:e}")
            })?;
        }
        if i % 3 == 1 {
            orthogonal_cases += 1;
            ensure(c <= 1e-12, || {
                format!("entry {i}: orthogonal columns give {c:e}")
            })?;
        }
    }
    ensure(worst_left <= 1e-8, || {
        format!("left-orthogonal drift {worst_left:e}")
    })?;
    ensure(worst_right <= 1e-8, || {
        format!("right permutation/diagonal drift {worst_right:e}")
    })?;
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "10000 matrices, left drift {worst_left:.1e}, right drift {worst_right:.1e}, \
         {zero_cases} zero-contrast and {orthogonal_cases} orthogonal cases, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for (i, j) in corpus(10_000).iter().enumerate() {
        let d = j.ncols();
        let j = dense(j.clone());
        let eps = offdiag_coherence(&j).map_err(|e| e.to_string())?;
        if (d as f64 - 1.0) * eps >= 1.0 {
            continue;
        }
        let bound = hadamard_gap_upper_bound(d, eps)
            .map_err(|e| e.to_string())?
            .value();
        let c = local_ima_contrast(&j).map_err(|e| e.to_string())?.value();
        ensure(c <= bound + 1e-9, || {
            format!("entry {i}: contrast {c} above bound {bound}")
        })?;
        checked += 1;
        tightest = tightest.min(bound - c);
    }
    Ok(format!(
        "{checked} matrices inside the bound's domain, smallest slack {tightest:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig::default();
    let rows = concentration_sweep(&cfg, SEED).map_err(|e| e.to_string())?;
    let props: Vec<(f64, usize)> = rows
        .iter()
        .map(|r| (r.empirical_success, r.trials))
        .collect();
    let summary = rows
        .iter()
        .map(|r| format!("m={}:{:.4}", r.m, r.empirical_success))
        .collect::<Vec<_>>()
        .join(" ");
    ensure(nondecreasing_within_2sigma(&props), || {
        format!("not nondecreasing within 2σ: {summary}")
    })?;
    let last = rows.last().expect("rows");
    ensure(last.m == 2048 && last.empirical_success >= 0.99, || {
        format!("success at m = {} is {}", last.m, last.empirical_success)
    })?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("{summary}, {:.1} s", start.elapsed().as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cfg = GenericityConfig::default();
    let rows = genericity_experiment(&cfg, SEED).map_err(|e| e.to_string())?;
    let props: Vec<(f64, usize)> = rows
        .iter()
        .map(|r| (r.empirical_success, r.trials))
        .collect();
    let summary = rows
        .iter()
        .map(|r| format!("m={}:{:.3}", r.m, r.empirical_success))
        .collect::<Vec<_>>()
        .join(" ");
    ensure(nondecreasing_within_2sigma(&props), || {
        format!("not nondecreasing within 2σ: {summary}")
    })?;

    // Interior and edge knots each own a window of width 2ε clipped to [0, 1].
    let p = (1.0 / cfg.delta_grid).ceil() as usize + 1;
    let per_axis = (0..=p)
        .map(|t| {
            let k = t as f64 * cfg.delta_grid;
            ((k + cfg.eps).min(1.0) - (k - cfg.eps).max(0.0)).max(0.0)
        })
        .sum::<f64>();
    let expected = 1.0 - (1.0 - per_axis).powi(cfg.d as i32);
    let mut worst_z: f64 = 0.0;
    for r in &rows {
        ensure(
            (r.boundary_fraction_expected - expected).abs() < 1e-12,
            || {
                format!(
                    "analytic fraction {} differs from oracle {expected}",
                    r.boundary_fraction_expected
                )
            },
        )?;
        let sigma = binomial_stderr(expected, r.trials * r.n_mc);
        let z = (r.boundary_fraction_observed - expected).abs() / sigma;
        worst_z = worst_z.max(z);
        ensure(z <= 3.0, || {
            format!(
                "m = {}: boundary fraction {} is {z:.2}σ from {expected}",
                r.m, r.boundary_fraction_observed
            )
        })?;
    }
    within(start.elapsed(), 300.0)?;
    Ok(format!(
        "{summary}, boundary fraction {expected:.4} (worst {worst_z:.2}σ), {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let (m, d, delta, eps) = (20, 2, 0.25, 0.01);
    let sampler = SphericalSampler::gaussian(m).map_err(|e| e.to_string())?;
    let mut rng = rng_from_seed(mix_seed(SEED, 5));
    let (mut worst_fd, mut worst_ratio, mut worst_knot) = (0f64, f64::INFINITY, 0f64);
    for map_idx in 0..10u64 {
        let map = sample_grid_map(d, m, delta, &sampler, eps, mix_path(SEED, &[5, map_idx]))
            .map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let s: Vec<f64> = (0..d).map(|_| rng.random_range(1e-3..1.0 - 1e-3)).collect();
            let a = map.jacobian(&s).map_err(|e| e.to_string())?;
            let fd = jacobian_fd(&map, &s, 1e-6).map_err(|e| e.to_string())?;
            let scale = a.as_dmatrix().abs().max().max(1.0);
            worst_fd = worst_fd.max((a.as_dmatrix() - fd.as_dmatrix()).abs().max() / scale);
        }
        for _ in 0..100 {
            let axis = rng.random_range(0..d);
            let knot = rng.random_range(1..4) as f64 * delta;
            let mut s: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            s[axis] = knot + rng.random_range(-eps..eps);
            ensure(map.in_boundary_region(&s), || {
                format!("{s:?} not in a window")
            })?;
            let j = map.jacobian(&s).map_err(|e| e.to_string())?;
            worst_ratio = worst_ratio.min(j.singular_ratio());
        }
        for t in 1..4 {
            for k in 0..d {
                let mut s: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                s[k] = t as f64 * delta;
                let col = map.jacobian(&s).map_err(|e| e.to_string())?.column(k);
                let blocks = map.blocks();
                let mean = (blocks[t - 1].column(k) + blocks[t].column(k)) * 0.5;
                worst_knot = worst_knot.max((col - mean).abs().max());
            }
        }
    }
    ensure(worst_fd <= 1e-4, || format!("FD disagreement {worst_fd:e}"))?;
    ensure(worst_ratio > 1e-8, || {
        format!("boundary singular ratio {worst_ratio:e}")
    })?;
    ensure(worst_knot <= 1e-8, || {
        format!("knot column error {worst_knot:e}")
    })?;
    Ok(format!(
        "FD {worst_fd:.1e}, boundary ratio ≥ {worst_ratio:.2e}, knot column {worst_knot:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut min_ratio = f64::INFINITY;
    let sampler = SphericalSampler::gaussian(20).map_err(|e| e.to_string())?;
    for i in 0..20u64 {
        let map = sample_grid_map(2, 20, 0.25, &sampler, 0.01, mix_path(SEED, &[6, 0, i]))
            .map_err(|e| e.to_string())?;
        let r = injectivity_probe(&map, 10_000, mix_path(SEED, &[6, 1, i]), None)
            .map_err(|e| e.to_string())?;
        ensure(r.violations == 0 && r.pairs == 10_000, || {
            format!("grid map {i}: {r:?}")
        })?;
        min_ratio = min_ratio.min(r.min_ratio);
    }
    let bbox = [(-2.0, 2.0); 3];
    for i in 0..20u64 {
        let mut rng = rng_from_seed(mix_path(SEED, &[6, 2, i]));
        let j0 = dense(gaussian_matrix(&mut rng, 6, 3));
        let new_col: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let k = (i % 3) as usize;
        let c = rng.random_range(-1.0..1.0);
        let map = make_two_piece(j0, k, new_col, c, 0.0).map_err(|e| e.to_string())?;
        let r = injectivity_probe(&map, 10_000, mix_path(SEED, &[6, 3, i]), Some(&bbox))
            .map_err(|e| e.to_string())?;
        ensure(r.violations == 0 && r.pairs == 10_000, || {
            format!("two-piece map {i}: {r:?}")
        })?;
        min_ratio = min_ratio.min(r.min_ratio);
    }
    let duplicate = dense(DMatrix::from_row_slice(
        3,
        2,
        &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0],
    ));
    let collapse = LinearMap::new(duplicate).map_err(|e| e.to_string())?;
    let r = injectivity_probe(&collapse, 10_000, mix_seed(SEED, 6), Some(&bbox[..2]))
        .map_err(|e| e.to_string())?;
    ensure(r.violations > 0, || {
        format!("duplicate-column map not flagged: {r:?}")
    })?;
    Ok(format!(
        "40 maps without violations (smallest stretch {min_ratio:.2e}), \
         duplicate-column map flagged {} times",
        r.violations
    ))
}

fn ks_marginals(
    a: &RotatedGaussianMPA,
    p_s: &FactorialDistribution,
    seed: u64,
) -> Result<f64, String> {
    let n = 100_000;
    let pts = sample_factorial(p_s, n, seed).map_err(|e| e.to_string())?;
    let images = pts
        .iter()
        .map(|s| mpa_forward(a, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let xs: Vec<f64> = images.iter().map(|y| y[i]).collect();
        let law = p_s.component(i);
        let ks = ks_one_sample(&xs, |x| law.cdf(x));
        let crit = ks_one_sample_critical_1pct(n);
        ensure(ks < crit, || {
            format!("component {i}: KS {ks:.5} ≥ {crit:.5}")
        })?;
        worst = worst.max(ks / crit);
    }
    Ok(worst)
}

fn criterion_7() -> Outcome {
    let r = rotation_2d(30f64.to_radians());
    let mut rng = rng_from_seed(mix_seed(SEED, 7));

    let gauss = FactorialDistribution::iid(UnivariateLaw::standard_gaussian(), 2)
        .map_err(|e| e.to_string())?;
    let ag = RotatedGaussianMPA::new(gauss, r.clone()).map_err(|e| e.to_string())?;
    let mut worst_linear: f64 = 0.0;
    for _ in 0..1000 {
        let s: Vec<f64> = (0..2).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y = mpa_forward(&ag, &s).map_err(|e| e.to_string())?;
        let rs = r.as_dmatrix() * DVector::from_column_slice(&s);
        worst_linear = worst_linear.max((y - rs).abs().max());
    }
    ensure(worst_linear <= 1e-9, || {
        format!("Gaussian MPA differs from R·s by {worst_linear:e}")
    })?;

    let uniform =
        FactorialDistribution::iid(UnivariateLaw::unit_uniform(), 2).map_err(|e| e.to_string())?;
    let laplace = FactorialDistribution::iid(UnivariateLaw::standard_laplace(), 2)
        .map_err(|e| e.to_string())?;
    let mut worst_ks: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for (idx, p_s) in [uniform, laplace].into_iter().enumerate() {
        let a = RotatedGaussianMPA::new(p_s.clone(), r.clone()).map_err(|e| e.to_string())?;
        worst_ks = worst_ks.max(ks_marginals(&a, &p_s, mix_path(SEED, &[7, idx as u64]))?);
        let pts = sample_factorial(&p_s, 100, mix_path(SEED, &[7, 10 + idx as u64]))
            .map_err(|e| e.to_string())?;
        for s in pts {
            let an = mpa_jacobian(&a, &s).map_err(|e| e.to_string())?;
            let fd = jacobian_fd(&a, &s, 1e-6).map_err(|e| e.to_string())?;
            let scale = an.as_dmatrix().abs().max().max(1.0);
            worst_fd = worst_fd.max((an.as_dmatrix() - fd.as_dmatrix()).abs().max() / scale);
        }
    }
    ensure(worst_fd <= 1e-5, || {
        format!("MPA Jacobian FD error {worst_fd:e}")
    })?;
    Ok(format!(
        "Gaussian case {worst_linear:.1e}, KS ≤ {worst_ks:.2} of critical, FD {worst_fd:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    let rho = 0.6;
    let dm = darmois_build(DensitySpec::CorrelatedGaussian { rho }, DEFAULT_RESOLUTION)
        .map_err(|e| e.to_string())?;
    let mut worst_cdf: f64 = 0.0;
    for i in 0..41 {
        for k in 0..41 {
            let x = [-4.0 + 0.2 * i as f64, -4.0 + 0.2 * k as f64];
            let u = dm.forward(x).map_err(|e| e.to_string())?;
            worst_cdf = worst_cdf.max((u[1] - gaussian_conditional_cdf(rho, x[0], x[1])).abs());
            let j = darmois_jacobian(&dm, x).map_err(|e| e.to_string())?;
            ensure(j.get(0, 1) == 0.0, || {
                format!("upper entry {} at {x:?}", j.get(0, 1))
            })?;
        }
    }
    ensure(worst_cdf <= 1e-4, || {
        format!("conditional CDF error {worst_cdf:e}")
    })?;

    let n = 100_000;
    let crit = chi_square_critical_1pct(99);
    let mut rng = rng_from_seed(mix_seed(SEED, 8));
    let gaussian_pts: Vec<[f64; 2]> = (0..n)
        .filter_map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            dm.forward([z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2])
                .ok()
        })
        .collect();
    let chi_gauss = chi_square_uniform_2d(&gaussian_pts, 10);

    let o = rotation_2d(30f64.to_radians());
    let laplace = FactorialDistribution::iid(UnivariateLaw::standard_laplace(), 2)
        .map_err(|e| e.to_string())?;
    let dl = darmois_build(
        DensitySpec::RotatedFactorial {
            rotation: o.clone(),
            sources: laplace.clone(),
        },
        DEFAULT_RESOLUTION,
    )
    .map_err(|e| e.to_string())?;
    let laplace_pts: Vec<[f64; 2]> = sample_factorial(&laplace, n, mix_seed(SEED, 9))
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|s| {
            let x = o.as_dmatrix() * DVector::from_vec(s);
            dl.forward([x[0], x[1]]).ok()
        })
        .collect();
    let chi_laplace = chi_square_uniform_2d(&laplace_pts, 10);
    for (name, pts, chi) in [
        ("correlated Gaussian", &gaussian_pts, chi_gauss),
        ("rotated Laplace", &laplace_pts, chi_laplace),
    ] {
        ensure(pts.len() as f64 >= 0.9999 * n as f64, || {
            format!("{name}: only {} of {n} draws inside the table", pts.len())
        })?;
        ensure(chi < crit, || format!("{name}: χ² {chi:.1} ≥ {crit:.1}"))?;
    }
    Ok(format!(
        "CDF error {worst_cdf:.1e}, χ² {chi_gauss:.1} and {chi_laplace:.1} (critical {crit:.1})"
    ))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let cfg = SpuriousConfig::default();
    let rep = spurious_gap_experiment(&cfg, SEED).map_err(|e| e.to_string())?;
    let describe = |b: &str, r: &str| {
        rep.row(b, r)
            .map(|x| format!("{b}/{r} {:.2e}±{:.1e}", x.mean, x.stderr))
            .unwrap_or_default()
    };
    let summary = [
        describe("mpa", "ground_truth"),
        describe("mpa", "spurious"),
        describe("darmois", "ground_truth"),
        describe("darmois", "spurious"),
        describe("gaussian_control", "spurious"),
    ]
    .join(", ");
    ensure(rep.pass && rep.rows.len() == 5, || summary.clone())?;
    for (name, bad) in [
        (
            "identity",
            SpuriousConfig {
                angle_deg: 0.0,
                ..cfg.clone()
            },
        ),
        (
            "permutation",
            SpuriousConfig {
                rotation: Some(permutation_matrix(&[1, 0]).map_err(|e| e.to_string())?),
                ..cfg.clone()
            },
        ),
    ] {
        let res = spurious_gap_experiment(&bad, SEED);
        ensure(matches!(res, Err(Error::TrivialRotation)), || {
            format!("{name} rotation not refused: {res:?}")
        })?;
    }
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "{summary}; trivial rotations refused, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_10() -> Outcome {
    let laplace = |d| FactorialDistribution::iid(UnivariateLaw::standard_laplace(), d);
    let uniform = |d| FactorialDistribution::iid(UnivariateLaw::unit_uniform(), d);
    let gauss = |d| FactorialDistribution::iid(UnivariateLaw::standard_gaussian(), d);
    let e = |e: Error| e.to_string();
    let mut rng = rng_from_seed(mix_seed(SEED, 10));

    let grid2: Arc<dyn MixingMap> = Arc::new(
        sample_grid_map(
            2,
            8,
            0.25,
            &SphericalSampler::gaussian(8).map_err(e)?,
            0.02,
            1,
        )
        .map_err(e)?,
    );
    let grid3: Arc<dyn MixingMap> = Arc::new(
        sample_grid_map(
            3,
            12,
            0.5,
            &SphericalSampler::gaussian(12).map_err(e)?,
            0.02,
            2,
        )
        .map_err(e)?,
    );
    let linear: Arc<dyn MixingMap> =
        Arc::new(LinearMap::new(dense(gaussian_matrix(&mut rng, 5, 2))).map_err(e)?);
    let conformal: Arc<dyn MixingMap> = Arc::new(
        ConformalMap::new(
            random_orthonormal(&mut rng, 4, 2),
            vec![
                ConformalPrimitive::similarity(1.5, rotation_2d(0.3), vec![0.2, 0.0]).map_err(e)?,
                ConformalPrimitive::inversion(vec![20.0, 5.0]),
            ],
            1e-6,
        )
        .map_err(e)?,
    );
    let two_piece: Arc<dyn MixingMap> = Arc::new(
        make_two_piece(
            dense(gaussian_matrix(&mut rng, 6, 3)),
            1,
            (0..6).map(|_| rng.sample(StandardNormal)).collect(),
            0.3,
            0.1,
        )
        .map_err(e)?,
    );
    use MonotoneTransform::*;
    let configs = [
        (
            "grid d=2",
            grid2,
            uniform(2).map_err(e)?,
            vec![1, 0],
            vec![
                Cube,
                Affine {
                    scale: 3.0,
                    shift: -1.0,
                },
            ],
        ),
        (
            "grid d=3",
            grid3,
            uniform(3).map_err(e)?,
            vec![2, 0, 1],
            vec![
                Cube,
                Affine {
                    scale: -2.0,
                    shift: 1.0,
                },
                Tanh,
            ],
        ),
        (
            "linear",
            linear,
            laplace(2).map_err(e)?,
            vec![1, 0],
            vec![
                Affine {
                    scale: 2.0,
                    shift: 1.0,
                },
                Cube,
            ],
        ),
        (
            "conformal",
            conformal,
            gauss(2).map_err(e)?,
            vec![0, 1],
            vec![Tanh, Cbrt],
        ),
        (
            "two-piece",
            two_piece,
            laplace(3).map_err(e)?,
            vec![1, 2, 0],
            vec![
                Cbrt,
                Identity,
                Affine {
                    scale: 0.5,
                    shift: -1.0,
                },
            ],
        ),
    ];
    let mut lines = Vec::new();
    for (i, (name, map, p_s, perm, h)) in configs.into_iter().enumerate() {
        let r = reparam_invariance_check(
            map,
            &p_s,
            &perm,
            &h,
            20_000,
            mix_path(SEED, &[10, i as u64]),
        )
        .map_err(e)?;
        ensure(r.pass, || format!("{name}: {r:?}"))?;
        lines.push(format!(
            "{name} Δ={:.1e} (3σ={:.1e})",
            r.difference,
            3.0 * r.combined_stderr
        ));
    }
    Ok(lines.join(", "))
}

fn criterion_11() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("ima-lab-acceptance-{}", std::process::id()));
    let configs = [
        (
            "contrast",
            r#"{"command": "contrast", "params": {"map": {"family": "grid", "m": 10, "d": 2, "delta": 0.25, "eps": 0.02}, "sources": [{"kind": "uniform", "params": {"low": 0, "high": 1}}, {"kind": "uniform", "params": {"low": 0, "high": 1}}], "n": 3000}}"#,
        ),
        (
            "sweep",
            r#"{"command": "sweep", "params": {"m_list": [8, 32, 128], "trials": 300}}"#,
        ),
        (
            "genericity",
            r#"{"command": "genericity", "params": {"m_list": [16, 64], "trials": 20, "n_mc": 400}}"#,
        ),
        (
            "spurious",
            r#"{"command": "spurious", "params": {"n": 2000, "darmois_resolution": 256}}"#,
        ),
        (
            "reparam",
            r#"{"command": "reparam", "params": {"n": 3000}}"#,
        ),
    ];
    let run = |cmd: &str, cfg: &std::path::Path, out: &std::path::Path, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_ima-lab"))
            .args([cmd, "--config"])
            .arg(cfg)
            .arg("--output-dir")
            .arg(out)
            .args(["--seed", "11", "--threads", threads])
            .env_remove("IMA_LAB_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || {
            format!("{cmd}: {}", String::from_utf8_lossy(&o.stderr))
        })?;
        std::fs::read(out.join(format!("{cmd}.csv"))).map_err(|e| e.to_string())
    };
    let result = (|| {
        std::fs::create_dir_all(&tmp).map_err(|e| e.to_string())?;
        let mut bytes = 0;
        for (cmd, text) in configs {
            let cfg = tmp.join(format!("{cmd}.json"));
            std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
            let a = run(cmd, &cfg, &tmp.join(format!("{cmd}-a")), "1")?;
            let b = run(cmd, &cfg, &tmp.join(format!("{cmd}-b")), "1")?;
            let c = run(cmd, &cfg, &tmp.join(format!("{cmd}-c")), "4")?;
            ensure(a == b, || format!("{cmd}: repeated run differs"))?;
            ensure(a == c, || format!("{cmd}: thread count changes the CSV"))?;
            bytes += a.len();
        }
        Ok(format!(
            "5 subcommands byte-identical across repeats and 1 vs 4 threads ({bytes} CSV bytes)"
        ))
    })();
    let _ = std::fs::remove_dir_all(&tmp);
    result
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("contrast axioms", criterion_1),
        ("bound consistency", criterion_2),
        ("linear concentration", criterion_3),
        ("grid-map genericity", criterion_4),
        ("smooth-map calculus", criterion_5),
        ("injectivity", criterion_6),
        ("MPA correctness", criterion_7),
        ("Darmois correctness", criterion_8),
        ("spurious gaps", criterion_9),
        ("reparametrization invariance", criterion_10),
        ("CLI reproducibility", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL  {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
