//! Fast invariant suite behind `envwit selftest`.

use serde::Serialize;

use crate::ensembles::{haar_unitary, hs_density, is_ppt, random_separable, RngStream};
use crate::experiments::{
    amplitude_scan, bell_mixture_scan, fig3_sweep, linspace, to_csv, SweepConfig,
};
use crate::matcore::{BipartiteDims, Matrix, Tolerance};
use crate::measure::{measurement_plan, PlanKind};
use crate::pncp::{
    adjoint, generalized_choi, reduction_map, theta_params, transposition_map, validate_pncp,
    witness_via_choi,
};
use crate::states::{bell_diagonal, max_entangled, BellDiagonalCoords, SchmidtWeights};
use crate::witness::{
    choi_closed_form_witness, computational_delta_t, delta_choi, delta_lambda, delta_t,
    expectation, family_delta, map_family_witness, schmidt_family_witness,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, bound: f64) -> Check {
    Check {
        name,
        passed: worst <= bound,
        detail: format!("worst {worst:.3e} (bound {bound:.0e})"),
    }
}

fn weights(rng: &mut RngStream, k: usize) -> SchmidtWeights<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.exp1() + 1e-3).collect();
    SchmidtWeights::from_unnormalized(&raw).expect("positive")
}

pub fn run(seed: u64) -> Vec<Check> {
    let tol = Tolerance::<f64>::default();
    let mut rng = RngStream::new(seed, u64::MAX);
    let mut out = Vec::new();

    let grid = linspace(0.0, 1.0, 101);
    let worst = bell_mixture_scan(&grid, &tol)
        .expect("scan")
        .iter()
        .map(|r| {
            let f = -(2.0 * r.x - 1.0).powi(2) / 4.0;
            (r.tr_w_plus - (r.x - 0.5))
                .abs()
                .max((r.tr_w_minus - (0.5 - r.x)).abs())
                .max((r.f1 - f).abs())
        })
        .fold(0.0, f64::max);
    out.push(check("bell mixture formulas", worst, 1e-12));

    let worst = amplitude_scan(&linspace(0.0, 1.0, 21), &tol)
        .expect("scan")
        .iter()
        .map(|r| (r.f2 - (r.gamma - 1.0) / 4.0).abs())
        .fold(0.0, f64::max);
    out.push(check("amplitude damping determinant", worst, 1e-12));

    let mut worst = 0.0f64;
    for d in [2, 3] {
        let dims = BipartiteDims::square(d).expect("d >= 2");
        let mut maps = vec![transposition_map(d), reduction_map(d)];
        if d == 3 {
            maps.push(generalized_choi(theta_params(0.7)));
        }
        for _ in 0..50 {
            let rho = hs_density::<f64>(dims, &mut rng);
            let p = weights(&mut rng, d);
            let (e, f) = (
                haar_unitary::<f64>(d, &mut rng),
                haar_unitary::<f64>(d, &mut rng),
            );
            let w = schmidt_family_witness(&p, &e, &f, &tol).expect("unitary bases");
            let delta = delta_t(&rho, &e, &f, &tol).expect("unitary bases");
            worst = worst
                .max((expectation(&w, &rho, &tol).expect("dims") - delta.quadratic_form(&p)).abs());
            for map in &maps {
                let w = map_family_witness(&p, map).expect("dims");
                let delta = delta_lambda(&rho, map).expect("dims");
                worst = worst.max(
                    (expectation(&w, &rho, &tol).expect("dims") - delta.quadratic_form(&p)).abs(),
                );
            }
        }
    }
    out.push(check("quadratic form identity", worst, 1e-10));

    let dims3 = BipartiteDims::square(3).expect("3");
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let rho = random_separable::<f64>(dims3, 4, &mut rng);
        worst = worst.max(-computational_delta_t(&rho).min_eigenvalue());
        worst = worst.max(
            -delta_lambda(&rho, &reduction_map(3))
                .expect("dims")
                .min_eigenvalue(),
        );
        for th in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            worst = worst.max(
                -delta_choi(&rho, theta_params(th))
                    .expect("dims")
                    .min_eigenvalue(),
            );
        }
    }
    out.push(check("separable states give PSD Delta", worst, 1e-9));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = hs_density::<f64>(dims3, &mut rng);
        let t = delta_lambda(&rho, &transposition_map(3))
            .expect("dims")
            .to_matrix();
        worst = worst.max(t.max_abs_diff(&computational_delta_t(&rho).to_matrix()));
        let p = theta_params(rng.uniform() * std::f64::consts::TAU);
        let c = delta_lambda(&rho, &adjoint(&generalized_choi(p)))
            .expect("dims")
            .to_matrix();
        worst = worst.max(c.max_abs_diff(&delta_choi(&rho, p).expect("dims").to_matrix()));
    }
    let phi3 = max_entangled::<f64>(3).expect("3");
    for k in 0..20 {
        let p = theta_params(k as f64 * 0.3);
        let w = witness_via_choi(&generalized_choi(p), &phi3).expect("dims");
        worst = worst.max(w.mat().max_abs_diff(choi_closed_form_witness(p).mat()));
    }
    out.push(check("map constructions agree", worst, 1e-12));

    let mut worst = 0.0f64;
    let mut all_valid = true;
    for th in linspace(0.0, std::f64::consts::TAU, 100) {
        let p = theta_params(th);
        worst = worst.max((p.a + p.b + p.c - 2.0).abs());
        let class = validate_pncp(p, &tol);
        all_valid &= class.valid && class.optimal;
    }
    let reduction_gap = generalized_choi(crate::pncp::ChoiParams::new(0.0, 1.0, 1.0))
        .choi_matrix()
        .max_abs_diff(&reduction_map::<f64>(3).choi_matrix());
    let mut c = check("boundary Choi maps", worst.max(reduction_gap), 1e-12);
    c.passed &= all_valid;
    out.push(c);

    let mut worst = 0.0f64;
    let mut octahedron_ok = true;
    for _ in 0..200 {
        let raw: Vec<f64> = (0..4).map(|_| rng.exp1()).collect();
        let s: f64 = raw.iter().sum();
        let coords = BellDiagonalCoords::from_probabilities(
            [raw[0] / s, raw[1] / s, raw[2] / s, raw[3] / s],
            &tol,
        )
        .expect("probabilities");
        let rho = bell_diagonal(&coords);
        let l = coords.pt_spectrum();
        worst = worst
            .max((family_delta(&rho, 1, &tol).expect("2x2").determinant() - l[1] * l[2]).abs());
        worst = worst
            .max((family_delta(&rho, 2, &tol).expect("2x2").determinant() - l[0] * l[3]).abs());
        octahedron_ok &= l.iter().all(|&x| x >= -tol.eig_tol) == is_ppt(&rho, &tol);
    }
    let mut c = check("Bell-diagonal factorizations", worst, 1e-12);
    c.passed &= octahedron_ok;
    out.push(c);

    let mut worst = 0.0f64;
    let dims2 = BipartiteDims::square(2).expect("2");
    for _ in 0..100 {
        let rho = hs_density::<f64>(dims2, &mut rng);
        for family in 1..=6 {
            let plan = measurement_plan::<f64>(PlanKind::Family(family), dims2).expect("family");
            let rebuilt = plan.reconstruct(&rho, &tol).expect("dims").to_matrix();
            let direct: Matrix<f64> = family_delta(&rho, family, &tol)
                .expect("family")
                .to_matrix();
            worst = worst.max(rebuilt.max_abs_diff(&direct));
        }
    }
    out.push(check("Delta from local expectations", worst, 1e-10));

    let run_with = |workers| {
        let cfg = SweepConfig {
            seed,
            trials: 2000,
            grid: vec![0.2, 0.5],
            workers,
            ..SweepConfig::default()
        };
        to_csv(&fig3_sweep(&cfg).expect("sweep"))
    };
    let same = run_with(1) == run_with(3);
    out.push(Check {
        name: "worker-count determinism",
        passed: same,
        detail: if same {
            "identical CSV".into()
        } else {
            "CSV differs".into()
        },
    });

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_is_green() {
        for c in super::run(1) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
