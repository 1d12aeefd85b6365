use noslip_core::geometry::{frame_check, Domain2, PieceId, TubeChart};
use noslip_core::math::{dot, norm};
use proptest::prelude::*;
use std::f64::consts::PI;

fn disc_piece() -> PieceId {
    PieceId { curve: 0, segment: 0 }
}

proptest! {
    #[test]
    fn disc_frame_calculus(s in 0.0f64..6.2, phi in 0.0f64..PI, x3 in -1.0f64..1.0) {
        let chart = TubeChart::new(Domain2::disc(1.0).unwrap(), 0.2).unwrap();
        let res = frame_check(&chart, disc_piece(), s, phi, x3, 1e-5).unwrap();
        prop_assert!(res.max() < 1e-6, "{res:?}");
    }

    #[test]
    fn frame_is_orthonormal_and_tangent(s in 0.0f64..6.2, phi in 0.0f64..PI) {
        let chart = TubeChart::new(Domain2::disc(1.0).unwrap(), 0.3).unwrap();
        let f = chart.frame(disc_piece(), s, phi);
        let n = chart.normal(disc_piece(), s, phi);
        prop_assert!((norm(&n) - 1.0).abs() < 1e-14);
        for i in 0..3 {
            prop_assert!(dot(&f[i], &n).abs() < 1e-14);
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&f[i], &f[j]) - want).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn straight_edges_have_no_connection_terms() {
    let chart = TubeChart::new(Domain2::strip(1.0).unwrap(), 0.1).unwrap();
    for phi in [0.3, 0.7, 2.0, 2.9] {
        let res = frame_check(&chart, PieceId { curve: 0, segment: 0 }, 0.3, phi, 0.0, 1e-5).unwrap();
        assert!(res.max() < 1e-6, "{res:?}");
    }
}

#[test]
fn junction_circles_use_one_sided_differences() {
    let chart = TubeChart::new(Domain2::disc(1.0).unwrap(), 0.1).unwrap();
    for phi in [0.0, PI] {
        let res = frame_check(&chart, disc_piece(), 1.0, phi, 0.0, 1e-6).unwrap();
        assert!(res.max() < 1e-4, "{res:?}");
    }
}

#[test]
fn bad_radius_is_rejected() {
    assert!(TubeChart::new(Domain2::disc(1.0).unwrap(), 0.0).is_err());
    assert!(TubeChart::new(Domain2::disc(1.0).unwrap(), f64::NAN).is_err());
}
