//! Property tests over randomized grids, models and starts.

use proptest::prelude::*;

use crate::analysis::eta_indicator;
use crate::flow::solver_for;
use crate::model::EnergyTerms;
use crate::tensor::{assemble_step_operator, solve_step};
use crate::*;

fn radial_grid() -> impl Strategy<Value = Grid> {
    (1usize..=3, 0.5f64..4.0, 16usize..160)
        .prop_map(|(d, r, m)| Grid::Radial(RadialGrid::new(d, r, m).unwrap()))
}

fn tensor_grid() -> impl Strategy<Value = Grid> {
    (1usize..=2, 0.5f64..4.0, 8usize..40).prop_map(|(d, l, n)| {
        let n = if d == 1 { 4 * n } else { n };
        Grid::Tensor(TensorGrid::cube(d, l, n).unwrap())
    })
}

fn any_grid() -> impl Strategy<Value = Grid> {
    prop_oneof![radial_grid(), tensor_grid()]
}

fn potential(d: usize) -> impl Strategy<Value = Potential> {
    prop_oneof![
        Just(Potential::Zero),
        (0.1f64..5.0).prop_map(move |g| Potential::harmonic_isotropic(d, g)),
        (0.0f64..200.0).prop_map(|k| Potential::RadialPower {
            coefficient: k,
            exponent: 2.0
        }),
    ]
}

fn instance() -> impl Strategy<Value = (Grid, ModelParams, Vec<f64>, f64)> {
    any_grid().prop_flat_map(|grid| {
        let d = grid.dimension();
        let n = grid.node_count();
        (
            Just(grid),
            (-40.0f64..40.0, 0.0f64..2.0, 0.1f64..10.0, potential(d)),
            proptest::collection::vec(0.0f64..1.0, n),
            1e-3f64..1.0,
        )
            .prop_map(|(grid, (b, l, c, v), start, tau)| {
                let m = ModelParams::new(grid.dimension(), b, l, c, v).unwrap();
                (grid, m, start, tau)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iterates_keep_mass_and_sign((grid, m, start, tau) in instance()) {
        prop_assume!(start.iter().any(|&v| v > 0.0));
        let init = Field::new(grid, start).unwrap();
        let cfg = SolverConfig { time_step: tau, max_iterations: 25, ..SolverConfig::default_for(init.grid()) };
        let mut solver = solver_for(init.grid(), &cfg);
        let c = m.mass();
        let mut ok = true;
        run_with_observer(&init, &m, &cfg, solver.as_mut(), |s| {
            ok &= (s.field.norm() - c).abs() / c < 1e-12;
            ok &= s.field.values().iter().all(|&v| v >= 0.0);
        }).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn mu_energy_identity(grid in any_grid(), b in -40.0f64..40.0, l in 0.0f64..2.0, c in 0.1f64..10.0, w in 0.05f64..1.0) {
        let m = ModelParams::free(grid.dimension(), b, l, c).unwrap();
        let f = default_initial_gaussian(&grid, c, Some(w)).unwrap();
        let t = EnergyTerms::of(&f, &m).unwrap();
        let mu = chemical_potential(&f, &m).unwrap();
        let e = energy(&f, &m).unwrap();
        let lhs = mu * c * c - e;
        let rhs = b / 2.0 * t.quartic + 0.6 * l * t.quintic;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (rhs.abs() + t.kinetic + t.potential));
    }

    #[test]
    fn eta_is_monotone_in_theta(grid in any_grid(), w in 0.05f64..2.0, t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
        let f = default_initial_gaussian(&grid, 1.0, Some(w)).unwrap();
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let a = eta_indicator(&f, lo).unwrap();
        let b = eta_indicator(&f, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b <= a);
    }

    #[test]
    fn thomas_solution_satisfies_the_system(
        diag in proptest::collection::vec(2.5f64..10.0, 3..200),
        seed in any::<u64>(),
    ) {
        let n = diag.len();
        let s = |k: usize| (((seed >> (k % 60)) & 7) as f64) / 7.0;
        let sys = TridiagonalSystem {
            sub: (0..n).map(|k| if k == 0 { 0.0 } else { -s(k) }).collect(),
            main: diag,
            sup: (0..n).map(|k| if k + 1 == n { 0.0 } else { -s(k + 1) }).collect(),
            rhs: (0..n).map(|k| s(k + 3) - 0.5).collect(),
        };
        let x = sys.solve().unwrap();
        let ax = sys.apply(&x);
        for (a, r) in ax.iter().zip(&sys.rhs) {
            prop_assert!((a - r).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_step_satisfies_the_system(grid in tensor_grid(), b in -20.0f64..20.0, l in 0.0f64..1.0, tau in 1e-3f64..1.0) {
        let m = ModelParams::free(grid.dimension(), b, l, 1.0).unwrap();
        let f = default_initial_gaussian(&grid, 1.0, None).unwrap();
        let mu = chemical_potential(&f, &m).unwrap();
        let (op, rhs) = assemble_step_operator(&f, &m, tau, mu).unwrap();
        let sol = solve_step(&op, &rhs, None, 1e-12, 50_000).unwrap();
        let r: f64 = op.apply(&sol.values).iter().zip(&rhs).map(|(a, r)| (a - r).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-9 * scale);
    }
}
