mod common;

use common::rk4_scaling;
use nssol::fields::{FnField, Perturbed, RadialField};
use nssol::model::{Family, IsothermalClosure, ModelParams};
use nssol::residual::{mass_residual, verify_window, Resolution, Window};
use nssol::scaling::{integrate, IvpOptions, IvpStatus, ScalingFn, ScalingOde};
use nssol::solution::{build_solution, verify_family, SolveOptions};
use proptest::prelude::*;

fn params(dim: u32, gamma: f64, theta: f64, delta: u8) -> ModelParams {
    ModelParams {
        dim,
        gamma,
        theta,
        pressure: 1.0,
        kappa: 1.0,
        delta,
    }
}

fn window(t_min: f64, t_max: f64) -> Window {
    Window {
        t_min,
        t_max,
        r_min: 0.1,
        r_max: 2.0,
    }
}

fn halving() -> [Resolution; 2] {
    [Resolution::uniform(1e-3), Resolution::uniform(5e-4)]
}

/// Exact families with windows on which they are resolved.
fn exact_cases() -> Vec<(&'static str, ModelParams, Family, Window)> {
    vec![
        (
            "isothermal/momentum-consistent",
            params(3, 1.0, 1.0, 1),
            Family::WithPressureIsothermal {
                amplitude: 1.0,
                b: -1.0,
                c: 0.0,
                a0: 1.0,
                a1: 0.5,
                closure: IsothermalClosure::MomentumConsistent,
            },
            window(0.1, 0.5),
        ),
        (
            "polytropic",
            params(1, 2.0, 2.0, 1),
            Family::WithPressurePolytropic {
                alpha: 1.0,
                a0: 1.0,
                a1: 0.5,
            },
            window(0.1, 0.3),
        ),
        (
            "power-law",
            params(3, 5.0 / 3.0, 1.0, 1),
            Family::WithPressurePowerLaw {
                m: -1.0,
                n: 1.0,
                sigma: 1.0,
                alpha: 1.0,
            },
            window(0.05, 0.5),
        ),
        (
            "pressureless theta = 1",
            params(3, 1.0, 1.0, 0),
            Family::PressurelessTheta1 {
                lambda: 1.0,
                alpha: 0.0,
                a0: 1.0,
                a1: 0.5,
            },
            window(0.1, 0.5),
        ),
        (
            "pressureless theta = 2",
            params(3, 1.0, 2.0, 0),
            Family::PressurelessThetaNot1 {
                lambda: 1.0,
                alpha: 1.0,
                a0: 1.0,
                a1: 0.5,
                density_form: Default::default(),
            },
            window(0.1, 0.5),
        ),
    ]
}

#[test]
fn exact_families_converge_at_second_order() {
    for (name, p, f, w) in exact_cases() {
        let rep = verify_family(&f, &p, &w, &halving(), 17, &SolveOptions::default()).unwrap();
        for (label, order) in [("mass", rep.order_mass), ("momentum", rep.order_mom)] {
            let order = order.unwrap_or_else(|| panic!("{name}: no {label} order"));
            assert!((1.7..=2.3).contains(&order), "{name} {label} order {order}");
        }
    }
}

#[test]
fn perturbations_are_detected() {
    let res = [Resolution::uniform(1e-3)];
    for (name, p, f, w) in exact_cases() {
        let t_end = w.t_max + 0.01;
        let sol = build_solution(&p, &f, &SolveOptions::until(t_end)).unwrap();
        let vp = sol.verification_params();
        let base = verify_window(sol.field(), &vp, &w, &res, 17).unwrap();
        // with theta = 1 (and gamma = 1 or no pressure) the equations are
        // homogeneous in rho, so c rho is again a solution
        let linear_in_rho = p.theta == 1.0 && (p.gamma == 1.0 || p.delta == 0);
        let cases: &[(f64, f64)] = if linear_in_rho {
            &[(1.0, 1.001)]
        } else {
            &[(1.0, 1.001), (1.001, 1.0)]
        };
        for &(rho_factor, u_factor) in cases {
            let pert = Perturbed {
                inner: sol.field(),
                rho_factor,
                u_factor,
            };
            let rep = verify_window(&pert, &vp, &w, &res, 17).unwrap();
            let gain = (rep.mass_linf / base.mass_linf).max(rep.mom_linf / base.mom_linf);
            assert!(gain >= 10.0, "{name} ({rho_factor}, {u_factor}): gain {gain}");
        }
    }
}

#[test]
fn nominal_isothermal_closure_does_not_balance_momentum() {
    let p = params(3, 1.0, 1.0, 1);
    let f = Family::WithPressureIsothermal {
        amplitude: 1.0,
        b: 1.0,
        c: 0.0,
        a0: 1.0,
        a1: 0.0,
        closure: IsothermalClosure::Nominal,
    };
    let rep = verify_family(&f, &p, &window(0.1, 0.5), &[Resolution::uniform(1e-3)], 9, &SolveOptions::default())
        .unwrap();
    assert!(rep.mom_linf > 1.0, "{}", rep.mom_linf);
}

#[test]
fn static_scalings_stay_constant() {
    for ode in [
        ScalingOde::Isothermal {
            b: 0.0,
            pressure: 1.0,
            kappa: 1.0,
            dim: 3,
            closure: IsothermalClosure::Nominal,
        },
        ScalingOde::PressurelessTheta1 { lambda: 0.0 },
        ScalingOde::PressurelessThetaNot1 {
            theta: 2.0,
            lambda: 3.0,
            dim: 2,
        },
    ] {
        let sc = integrate(ode, 1.7, 0.0, &IvpOptions::until(2.0)).unwrap();
        let ScalingFn::NumericIvp(n) = &sc else {
            unreachable!()
        };
        let dev = n.values().iter().map(|a| (a - 1.7).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{ode:?}: {dev}");
    }
}

fn gaussian_field(b: f64, p: f64, dim: i32) -> impl Fn(f64, f64) -> (f64, f64) + Sync {
    move |t, r| {
        let a = 1.0 + p * t * t;
        let adot = 2.0 * p * t;
        let z = r / a;
        ((-b * z * z).exp() / a.powi(dim), adot / a * r)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_equation_holds_for_any_profile(
        b in 0.1f64..2.0,
        p in 0.1f64..2.0,
        dim in 1u32..=4,
        t in 0.2f64..1.0,
        r in 0.2f64..2.0,
    ) {
        let f = FnField(gaussian_field(b, p, dim as i32));
        let r1 = mass_residual(&f, dim, t, r, Resolution::uniform(2e-3)).unwrap();
        let r2 = mass_residual(&f, dim, t, r, Resolution::uniform(1e-3)).unwrap();
        prop_assert!(r1.abs() < 1e-4);
        // second-order decay unless already at round-off level
        prop_assert!(r2.abs() < 0.3 * r1.abs() || r1.abs() < 1e-9);
    }

    #[test]
    fn velocity_perturbation_breaks_mass_balance(
        b in 0.1f64..2.0,
        p in 0.1f64..2.0,
        eps in 1e-3f64..1e-1,
    ) {
        let f = FnField(gaussian_field(b, p, 3));
        let w = Window { t_min: 0.2, t_max: 1.0, r_min: 0.2, r_max: 2.0 };
        let vp = params(3, 1.0, 1.0, 1);
        let res = [Resolution::uniform(1e-3)];
        let base = verify_window(&f, &vp, &w, &res, 9).unwrap();
        let pert = Perturbed { inner: &f, rho_factor: 1.0, u_factor: 1.0 + eps };
        let rep = verify_window(&pert, &vp, &w, &res, 9).unwrap();
        prop_assert!(rep.mass_linf >= 10.0 * base.mass_linf);
    }

    #[test]
    fn adaptive_scaling_matches_fixed_step_oracle(
        kind in 0usize..4,
        a1 in 0.0f64..1.0,
        coeff in 0.1f64..1.0,
        dim in 1u32..=3,
    ) {
        let ode = match kind {
            0 => ScalingOde::Isothermal { b: coeff, pressure: 1.0, kappa: 1.0, dim, closure: IsothermalClosure::Nominal },
            1 => ScalingOde::Polytropic { gamma: 1.0 + coeff, pressure: 1.0, kappa: 1.0, dim },
            2 => ScalingOde::PressurelessTheta1 { lambda: coeff },
            _ => ScalingOde::PressurelessThetaNot1 { theta: 1.0 + coeff, lambda: coeff, dim },
        };
        let t_end = 0.3;
        let sc = integrate(ode, 1.0, a1, &IvpOptions::until(t_end)).unwrap();
        prop_assume!(sc.status() == IvpStatus::Completed);
        let got = sc.evaluate(t_end).unwrap();
        let (a, adot) = rk4_scaling(&ode, 1.0, a1, t_end, 1e-5);
        prop_assert!((got.a - a).abs() < 1e-8 * a.abs());
        prop_assert!((got.adot - adot).abs() < 1e-7 * (1.0 + adot.abs()));
    }
}

#[test]
fn field_scaling_invariance_across_families() {
    for (name, p, f, w) in exact_cases() {
        let sol = build_solution(&p, &f, &SolveOptions::until(w.t_max)).unwrap();
        let sc = sol.scaling();
        let n = p.dim as i32;
        let (t1, t2) = (w.t_min, w.t_max);
        let (a1, a2) = (sc.evaluate(t1).unwrap().a, sc.evaluate(t2).unwrap().a);
        for z in [0.2, 0.7, 1.3] {
            let g1 = sol.field().sample(t1, z * a1).unwrap().rho * a1.powi(n);
            let g2 = sol.field().sample(t2, z * a2).unwrap().rho * a2.powi(n);
            assert!((g1 - g2).abs() <= 1e-12 * g1.abs().max(1e-300), "{name}: {g1} vs {g2}");
        }
    }
}
