//! Large-N formulas against finite-N exact results and independent
//! representations.

use fgmi_core::asymptotics::{
    entropy_a_finite, entropy_b_complement, entropy_fraction, entropy_max_degenerate_limit,
    hl_coefficients, multipartite_mean, mutual_info_finite_a, mutual_info_fraction,
    mutual_info_max_degenerate_limit, saddle_h, SaddleContext,
};
use fgmi_core::finite::max_degenerate_breakdown;
use fgmi_core::{total_entropy, Spectrum};

/// `int_0^1 Θ(φ(λ)) dλ` by a midpoint sum; error below `1 / (2 * points)`.
fn step_integral(ctx: &SaddleContext, t: f64, u: f64, points: usize) -> f64 {
    let dl = 1.0 / points as f64;
    let mut inside = 0usize;
    for i in 0..points {
        let lambda = (i as f64 + 0.5) * dl;
        if ctx.stationarity(t, u, lambda) > 0.0 {
            inside += 1;
        }
    }
    inside as f64 * dl
}

fn grid_spectra() -> Vec<Spectrum> {
    vec![
        Spectrum::new(vec![0.1, 0.3, 0.5, 0.7, 0.9]).unwrap(),
        Spectrum::degenerate(5, 0.5).unwrap(),
        Spectrum::new(vec![0.0, 0.2, 0.4, 0.95, 0.99]).unwrap(),
    ]
}

#[test]
fn saddle_matches_step_representation() {
    for s in grid_spectra() {
        for &f in &[0.2, 0.5, 0.7] {
            let ctx = SaddleContext::new(&s, f).unwrap();
            for &t in &[1.0, 1.05, 1.5, 3.0, 20.0] {
                for &u in &[0.1, 0.3, 0.5, 0.8, 1.0] {
                    let h = saddle_h(&ctx, t, u).unwrap();
                    let oracle = step_integral(&ctx, t, u, 1 << 21);
                    assert!(
                        (h - oracle).abs() < 1e-6,
                        "f={f} t={t} u={u}: {h} vs {oracle}"
                    );
                }
            }
        }
    }
}

#[test]
fn coefficient_identities_on_grid() {
    for s in grid_spectra() {
        for &f in &[0.2, 0.5, 0.7] {
            let ctx = SaddleContext::new(&s, f).unwrap();
            for &t in &[1.0, 1.05, 1.5, 3.0, 20.0] {
                for &u in &[0.0, 0.5, 1.0] {
                    let h = saddle_h(&ctx, t, u).unwrap();
                    let c = hl_coefficients(&ctx, t, u, h).unwrap();
                    assert!((c.h10 - c.h01 + c.h00 / h).abs() < 1e-9 * (1.0 + c.h01.abs()));
                    assert!((c.h20 - c.h02 + c.h10 / h).abs() < 1e-9 * (1.0 + c.h02.abs()));
                    assert!(c.l2 > 0.0);
                }
            }
        }
    }
}

#[test]
fn finite_subsystem_entropy_against_exact() {
    let (n, n_a, y) = (40, 2, 0.5);
    let s = Spectrum::degenerate(n, y).unwrap();
    let exact = max_degenerate_breakdown(n, n_a, y).unwrap();
    let approx = entropy_a_finite(n, n_a, &s).unwrap().value_at(n);
    assert!(
        (approx - exact.s_a()).abs() < 5e-4,
        "{approx} vs {}",
        exact.s_a()
    );
    let sb = entropy_b_complement(n, n_a, &s).unwrap();
    assert!((sb - exact.s_b()).abs() < 5e-2, "{sb} vs {}", exact.s_b());
    // To the order kept, S_A = N_A log 2 and I = S_A + S_B - S_total.
    let i = n_a as f64 * std::f64::consts::LN_2 + sb - total_entropy(&s);
    assert!((i - mutual_info_finite_a(n, n_a, &s).unwrap()).abs() < 1e-12);
}

#[test]
fn finite_subsystem_mutual_information_decays_as_one_over_n() {
    let limit = mutual_info_finite_a(1000, 2, &Spectrum::degenerate(1000, 0.5).unwrap()).unwrap();
    let errors: Vec<f64> = [10usize, 20, 40, 80]
        .iter()
        .map(|&n| {
            (max_degenerate_breakdown(n, 2, 0.5)
                .unwrap()
                .mutual_information()
                - limit)
                .abs()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..2.3).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn volume_terms_match_closed_form() {
    for &f in &[0.2, 0.45, 0.7] {
        for &y in &[0.3, 0.8] {
            let s = Spectrum::degenerate(10, y).unwrap();
            let r = entropy_fraction(&SaddleContext::new(&s, f).unwrap()).unwrap();
            let closed = entropy_max_degenerate_limit(f, y).unwrap();
            assert!(
                (r.volume_term - closed).abs() < 1e-6,
                "f={f} y={y}: {} vs {closed}",
                r.volume_term
            );
        }
    }
}

#[test]
fn fraction_mutual_information_against_exact() {
    let (f, y) = (0.4, 0.5);
    let mut errors = Vec::new();
    for n in [10usize, 20, 40] {
        let s = Spectrum::degenerate(n, y).unwrap();
        let approx = mutual_info_fraction(&s, f, n).unwrap();
        let exact = max_degenerate_breakdown(n, (f * n as f64).round() as usize, y).unwrap();
        errors.push((approx - exact.mutual_information()).abs());
    }
    assert!(errors[2] < 1e-3, "{errors:?}");
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn degenerate_limits_against_large_n_exact() {
    let n = 400;
    let s_a = max_degenerate_breakdown(n, 200, 0.7).unwrap().s_a() / n as f64;
    assert!((s_a - entropy_max_degenerate_limit(0.5, 0.7).unwrap()).abs() < 5e-3);
    let i = max_degenerate_breakdown(n, 120, 0.5)
        .unwrap()
        .mutual_information()
        / n as f64;
    assert!((i - mutual_info_max_degenerate_limit(0.3, 0.5).unwrap()).abs() < 5e-3);
}

#[test]
fn multipartite_counts_more_correlations() {
    let n = 30;
    let s = Spectrum::degenerate(n, 0.5).unwrap();
    let third = 1.0 / 3.0;
    let tri = multipartite_mean(&s, &[third, third, 1.0 - 2.0 * third], n).unwrap();
    let bi = mutual_info_fraction(&s, third, n).unwrap();
    assert!(tri >= 0.0);
    assert!(tri > bi, "{tri} vs {bi}");
    let zero = Spectrum::degenerate(n, 0.0).unwrap();
    let v = multipartite_mean(&zero, &[0.2, 0.3, 0.5], n);
    assert!(v.as_ref().is_ok_and(|v| v.abs() < 1e-12), "{v:?}");
}
