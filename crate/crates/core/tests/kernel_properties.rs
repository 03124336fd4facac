//! Structural properties of the finite-N kernel, joint densities and
//! average entropies.

use fgmi_core::finite::{
    exact_breakdown, exact_breakdown_auto, jpdf, jpdf_corank2_step, max_degenerate_breakdown,
    DensityValue, JacobiKernel, KernelEvaluator,
};
use fgmi_core::numerics::{integrate, QuadratureSpec};
use fgmi_core::{Partition, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerance(1e-11, 1e-11)
}

fn spectra() -> Vec<Spectrum> {
    vec![
        Spectrum::new(vec![0.2, 0.6]).unwrap(),
        Spectrum::new(vec![0.15, 0.5, 0.85]).unwrap(),
        Spectrum::new(vec![0.1, 0.35, 0.6, 0.95]).unwrap(),
        Spectrum::new(vec![0.05, 0.3, 0.45, 0.7, 1.0]).unwrap(),
        Spectrum::new(vec![0.12, 0.24, 0.41, 0.58, 0.77, 0.9]).unwrap(),
    ]
}

#[test]
fn level_density_integrates_to_m() {
    for s in spectra() {
        for m in 1..s.n() {
            let ev = KernelEvaluator::new(&s, m).unwrap();
            let total = ev.integrate_linear_statistic(|_| 1.0, &tight()).unwrap();
            assert!(
                (total - m as f64).abs() < 1e-8,
                "N = {}, m = {m}: {total}",
                s.n()
            );
        }
    }
}

#[test]
fn kernel_reproduces_itself() {
    let points = [0.05, 0.33, 0.61];
    for s in spectra() {
        for m in 1..s.n() {
            let ev = KernelEvaluator::new(&s, m).unwrap();
            let spec = ev.quadrature_spec(&tight());
            for &x in &points {
                for &y in &points {
                    let lhs = integrate(
                        |z| ev.kernel(x, z).unwrap() * ev.kernel(z, y).unwrap(),
                        0.0,
                        s.max(),
                        &spec,
                    )
                    .unwrap();
                    let rhs = ev.kernel(x, y).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-6 * (1.0 + rhs.abs()),
                        "N = {}, m = {m}",
                        s.n()
                    );
                }
            }
        }
    }
}

#[test]
fn weights_are_biorthonormal_to_even_monomials() {
    for s in spectra() {
        for m in 1..s.n() {
            let ev = KernelEvaluator::new(&s, m).unwrap();
            let spec = ev.quadrature_spec(&tight());
            for j in 0..m {
                let a_j = ev.log_coefficients()[j].exp();
                for c in 1..=m {
                    let v = integrate(
                        |x| a_j * x.powi(2 * j as i32) * ev.weight(c, x).unwrap(),
                        0.0,
                        s.max(),
                        &spec,
                    )
                    .unwrap();
                    let want = if c == j + 1 { 1.0 } else { 0.0 };
                    assert!(
                        (v - want).abs() < 1e-7,
                        "N = {}, m = {m}, j = {j}, c = {c}: {v}",
                        s.n()
                    );
                }
            }
        }
    }
}

#[test]
fn correlation_functions_are_nonnegative() {
    for s in spectra() {
        for m in 1..s.n() {
            let ev = KernelEvaluator::new(&s, m).unwrap();
            for i in 0..=60 {
                let x = i as f64 / 60.0;
                assert!(ev.level_density(x).unwrap() >= -1e-10);
                for k in 0..=12 {
                    let y = k as f64 / 12.0;
                    assert!(ev.two_point(x, y).unwrap() >= -1e-8, "R2({x}, {y}) < 0");
                }
            }
        }
    }
}

fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, top: f64, breakpoints: &[f64]) -> f64 {
    let spec = QuadratureSpec::default()
        .with_tolerance(1e-9, 1e-9)
        .with_breakpoints(breakpoints.to_vec());
    integrate(
        |x1| integrate(|x2| f(x1, x2), 0.0, top, &spec).unwrap(),
        0.0,
        top,
        &spec,
    )
    .unwrap()
}

#[test]
fn joint_density_normalization_and_marginal() {
    // N = 2, m = 1: the joint density is R_1 itself.
    let s = Spectrum::new(vec![0.3, 0.8]).unwrap();
    let ev = KernelEvaluator::new(&s, 1).unwrap();
    for i in 0..20 {
        let x = i as f64 / 20.0;
        assert!((jpdf(&ev, &[x]).unwrap() - ev.level_density(x).unwrap()).abs() < 1e-12);
    }
    let total = ev.integrate_linear_statistic(|_| 1.0, &tight()).unwrap();
    assert!((total - 1.0).abs() < 1e-9);

    // N = 3, m = 2: normalized, and m times the marginal is R_1.
    let s = Spectrum::new(vec![0.25, 0.55, 0.9]).unwrap();
    let ev = KernelEvaluator::new(&s, 2).unwrap();
    let total = integrate_2d(|a, b| jpdf(&ev, &[a, b]).unwrap(), s.max(), s.values());
    assert!((total - 1.0).abs() < 1e-6, "{total}");
    let spec = QuadratureSpec::default()
        .with_tolerance(1e-10, 1e-10)
        .with_breakpoints(s.values().to_vec());
    for &x in &[0.1, 0.4, 0.7] {
        let marginal = integrate(|b| jpdf(&ev, &[x, b]).unwrap(), 0.0, s.max(), &spec).unwrap();
        let r1 = ev.level_density(x).unwrap();
        assert!(
            (2.0 * marginal - r1).abs() < 1e-7,
            "x = {x}: {} vs {r1}",
            2.0 * marginal
        );
    }
}

#[test]
fn corank_steps_compose() {
    // Two corank-2 steps from N = 3 down to one value reproduce the m = 1
    // density. The step density is symmetric in the children, so the ordered
    // region a < b carries half the mass.
    let parent = [0.2, 0.5, 0.85];
    let s = Spectrum::new(parent.to_vec()).unwrap();
    let ev = KernelEvaluator::new(&s, 1).unwrap();
    let spec = QuadratureSpec::default()
        .with_tolerance(1e-10, 1e-10)
        .with_breakpoints(parent.to_vec());
    let normalization = integrate_2d(
        |a, b| {
            if b - a < 1e-7 {
                return 0.0;
            }
            jpdf_corank2_step(&parent, &[a, b]).unwrap()
        },
        0.85,
        &parent,
    );
    assert!((2.0 * normalization - 1.0).abs() < 1e-6, "{normalization}");
    for &x in &[0.1, 0.3, 0.6] {
        let composed = integrate(
            |a| {
                let inner = spec.clone().with_breakpoints(vec![0.2, 0.5, 0.85, a, x]);
                integrate(
                    |b| {
                        // The integrand vanishes continuously as b -> a.
                        if b <= x || b - a < 1e-7 {
                            return 0.0;
                        }
                        jpdf_corank2_step(&parent, &[a, b]).unwrap()
                            * jpdf_corank2_step(&[a, b], &[x]).unwrap()
                    },
                    a,
                    0.85,
                    &inner,
                )
                .unwrap()
            },
            0.0,
            0.85,
            &spec.clone().with_breakpoints(vec![0.2, 0.5, 0.85, x]),
        )
        .unwrap();
        let composed = 2.0 * composed;
        let direct = ev.level_density(x).unwrap();
        assert!(
            (composed - direct).abs() < 1e-6,
            "x = {x}: {composed} vs {direct}"
        );
    }
}

#[test]
fn series_and_quadrature_routes_agree() {
    for s in spectra() {
        for m in 1..s.n() {
            let ev = KernelEvaluator::new(&s, m).unwrap();
            let q = ev.average_entropy_with(&tight()).unwrap();
            let series = ev.average_entropy_series(1e-14).unwrap();
            assert!(
                (q - series).abs() < 1e-9,
                "N = {}, m = {m}: {q} vs {series}",
                s.n()
            );
        }
    }
}

#[test]
fn jacobi_density_matches_nearly_degenerate_kernel() {
    let y0 = 0.6;
    for &(n, m) in &[(3usize, 1usize), (4, 2), (4, 1)] {
        let s = Spectrum::new(
            (0..n)
                .map(|j| y0 * (1.0 + j as f64 * 1e-6))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let ev = KernelEvaluator::new(&s, m).unwrap();
        let jac = JacobiKernel::new(m.min(n - m), m.max(n - m), y0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            let x = y0 * (i as f64 + 0.5) / 100.0;
            let DensityValue::Continuous(want) = jac.density(x) else {
                panic!("unexpected point mass")
            };
            worst = worst.max((ev.level_density(x).unwrap() - want).abs());
        }
        assert!(worst <= 1e-3, "N = {n}, m = {m}: sup error {worst}");
    }
}

#[test]
fn exact_mutual_information_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let n = rng.random_range(2..=6);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        let s = Spectrum::new(v).unwrap();
        let n_a = rng.random_range(1..n);
        let p = Partition::new(n, n_a).unwrap();
        let b = exact_breakdown_auto(&s, p, &QuadratureSpec::default())
            .unwrap()
            .breakdown;
        assert!(
            b.mutual_information() >= -1e-8,
            "{s:?}: {}",
            b.mutual_information()
        );
    }
}

#[test]
fn kernel_and_jacobi_breakdowns_agree_near_degeneracy() {
    let n = 5;
    let y0 = 0.5;
    let spread: Vec<f64> = (0..n).map(|j| y0 + 1e-3 * j as f64).collect();
    let s = Spectrum::new(spread).unwrap();
    let p = Partition::new(n, 2).unwrap();
    let kernel = exact_breakdown(&s, p).unwrap();
    let jac = max_degenerate_breakdown(n, 2, y0 + 2e-3).unwrap();
    assert!((kernel.mutual_information() - jac.mutual_information()).abs() < 1e-4);
}
