//! Property tests for the structural invariants: norm homogeneity and
//! modular bounds, pairing inequalities, grid covering, matrix norm
//! identities, and the support-function axioms.

use proptest::prelude::*;

use vlfield_core::directions::DirectionSet;
use vlfield_core::domain::{one_third_cover, LatticeDomain};
use vlfield_core::exponent::ExponentField;
use vlfield_core::field::ScalarField;
use vlfield_core::linalg::{norm3, op_norm, Mat};
use vlfield_core::sparse::ConvexBody;
use vlfield_core::varnorm::{holder_pairing, luxemburg_norm, modular};

fn domain() -> LatticeDomain {
    LatticeDomain::build(1, 1.0, 4).unwrap()
}

fn field_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..20.0, 32)
}

fn exponent_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.2f64..7.5, 32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_homogeneous(values in field_values(), exps in exponent_values(), c in 0.01f64..100.0) {
        let d = domain();
        let f = ScalarField::new(&d, values).unwrap();
        let p = ExponentField::from_values(&d, exps, 2.0).unwrap();
        let (base, _) = luxemburg_norm(&f, &p).unwrap();
        let (scaled, _) = luxemburg_norm(&f.scale(c).unwrap(), &p).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-10 * (c * base).max(1e-12));
    }

    #[test]
    fn norm_modular_bracket(values in field_values(), exps in exponent_values()) {
        let d = domain();
        let f = ScalarField::new(&d, values).unwrap();
        let p = ExponentField::from_values(&d, exps, 2.0).unwrap();
        let (norm, _) = luxemburg_norm(&f, &p).unwrap();
        prop_assume!(norm > 0.0);
        let rho = modular(&f, &p).unwrap();
        let (lo, hi) = if norm > 1.0 {
            (rho.powf(1.0 / p.p_plus()), rho.powf(1.0 / p.p_minus()))
        } else {
            (rho.powf(1.0 / p.p_minus()), rho.powf(1.0 / p.p_plus()))
        };
        prop_assert!(lo <= norm * (1.0 + 1e-9));
        prop_assert!(norm <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn modular_matches_direct_sum(values in field_values(), exps in exponent_values()) {
        let d = domain();
        let f = ScalarField::new(&d, values.clone()).unwrap();
        let p = ExponentField::from_values(&d, exps.clone(), 2.0).unwrap();
        let direct: f64 = values
            .iter()
            .zip(&exps)
            .map(|(v, e)| v.abs().powf(*e) * d.cell_measure())
            .sum();
        let m = modular(&f, &p).unwrap();
        prop_assert!((m - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn pairing_never_exceeds_twice_the_norms(
        fv in field_values(),
        gv in field_values(),
        exps in exponent_values(),
    ) {
        let d = domain();
        let f = ScalarField::new(&d, fv).unwrap();
        let g = ScalarField::new(&d, gv).unwrap();
        let p = ExponentField::from_values(&d, exps, 2.0).unwrap();
        let (lhs, rhs) = holder_pairing(&f, &g, &p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn shifted_grid_cover_exists_with_bounded_side(
        lo_frac in 0.0f64..1.0,
        side_frac in 0.02f64..0.5,
    ) {
        let d = LatticeDomain::build(1, 2.0, 4).unwrap();
        let l = d.half_width();
        let side = side_frac;
        let lo = [-l + (2.0 * l - side) * lo_frac, 0.0, 0.0];
        match one_third_cover(&d, &lo, side) {
            Ok((_, q)) => {
                let qlo = q.lo_coords(&d)[0];
                prop_assert!(qlo <= lo[0] + 1e-12);
                prop_assert!(lo[0] + side <= qlo + q.side() + 1e-12);
                prop_assert!(q.side() <= 6.0 * side * (1.0 + 1e-12));
            }
            Err(_) => {
                // The box can truncate covers near the boundary; the query
                // cube itself was inside, so only report coverage failures
                // away from the edge.
                prop_assert!(
                    lo[0] < -l + 6.0 * side || lo[0] + side > l - 6.0 * side,
                    "cover missing away from the boundary"
                );
            }
        }
    }

    #[test]
    fn op_norm_column_bounds(entries in prop::collection::vec(-5.0f64..5.0, 9)) {
        for d in 1..=3usize {
            let m = Mat::from_rows(d, &entries[..d * d]);
            let direct = op_norm(&m);
            let mut col_sum = 0.0;
            for i in 0..d {
                let mut e = [0.0; 3];
                e[i] = 1.0;
                col_sum += norm3(&m.matvec(&e)[..d]);
            }
            prop_assert!(direct <= col_sum + 1e-10);
            prop_assert!(direct >= col_sum / d as f64 - 1e-10);
        }
    }

    #[test]
    fn symmetric_products_commute_in_norm(entries in prop::collection::vec(-3.0f64..3.0, 12)) {
        let d = 2;
        let u = Mat::from_rows(d, &[entries[0], entries[1], entries[1], entries[2]]);
        let v = Mat::from_rows(d, &[entries[3], entries[4], entries[4], entries[5]]);
        let uv = op_norm(&u.mul(&v));
        let vu = op_norm(&v.mul(&u));
        prop_assert!((uv - vu).abs() <= 1e-10 * uv.max(1.0));
    }

    #[test]
    fn support_function_axioms(vx in -5.0f64..5.0, vy in -5.0f64..5.0, c in -4.0f64..4.0) {
        let dirs = DirectionSet::fit(2, 32);
        let body = ConvexBody::segment(&dirs, &[vx, vy]);
        prop_assert!(body.valid(&dirs), "evenness and nonnegativity");
        // Positive homogeneity through vector scaling.
        let scaled = ConvexBody::segment(&dirs, &[c * vx, c * vy]);
        for (a, b) in scaled.h.iter().zip(&body.h) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * (1.0 + b));
        }
        // Minkowski additivity is support-function addition by construction.
        let other = ConvexBody::segment(&dirs, &[vy, -vx]);
        let sum: Vec<f64> = body.h.iter().zip(&other.h).map(|(a, b)| a + b).collect();
        for (j, u) in dirs.iter().enumerate() {
            let expect = (vx * u[0] + vy * u[1]).abs() + (vy * u[0] - vx * u[1]).abs();
            prop_assert!((sum[j] - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }
}
