//! proptest invariants for projection, quantization, and spherical math.

use proptest::prelude::*;

use pursuit_core::geometry::{cartesian_to_spherical, wrap_angle, AgentPose, Vec3};
use pursuit_core::psto::{project_to_grid, GridConfig};

fn finite_point() -> impl Strategy<Value = Vec3> {
    (
        -20.0f64..20.0,
        -20.0f64..20.0,
        -20.0f64..20.0,
    )
        .prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    /// Azimuth always lands in [-pi, pi), elevation in [-pi/2, pi/2], and
    /// the range equals the Euclidean norm.
    #[test]
    fn spherical_ranges(p in finite_point()) {
        prop_assume!(p.norm() > 1e-6);
        let s = cartesian_to_spherical(p).unwrap();
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&s.azimuth));
        prop_assert!(s.elevation >= -std::f64::consts::FRAC_PI_2 - 1e-12);
        prop_assert!(s.elevation <= std::f64::consts::FRAC_PI_2 + 1e-12);
        prop_assert!((s.range - p.norm()).abs() < 1e-12);
    }

    /// Projected indices are always inside the grid.
    #[test]
    fn projection_indices_in_bounds(p in finite_point()) {
        let cfg = GridConfig::default();
        if let Some((v, h)) = project_to_grid(p, &cfg) {
            prop_assert!(v < cfg.rows);
            prop_assert!(h < cfg.cols);
        }
    }

    /// A point reconstructed from the center of any cell projects back to
    /// that cell.
    #[test]
    fn cell_centers_project_to_their_cell(
        v in 0usize..6,
        h in 0usize..120,
        r in 0.5f64..9.5,
    ) {
        let cfg = GridConfig::default();
        let phi = cfg.phi_min + (h as f64 + 0.5) * cfg.d_phi;
        let theta = cfg.theta_min + (v as f64 + 0.5) * cfg.d_theta;
        let p = Vec3::new(
            r * theta.cos() * phi.cos(),
            r * theta.cos() * phi.sin(),
            r * theta.sin(),
        );
        prop_assert_eq!(project_to_grid(p, &cfg), Some((v, h)));
    }

    /// Frame transforms preserve distances.
    #[test]
    fn transforms_are_isometries(
        p in finite_point(),
        q in finite_point(),
        px in -9.0f64..9.0,
        py in -9.0f64..9.0,
        yaw in -3.14f64..3.14,
    ) {
        let pose = AgentPose::new(Vec3::new(px, py, 1.0), yaw);
        let d_world = (p - q).norm();
        let d_body = (pose.world_to_body(p) - pose.world_to_body(q)).norm();
        prop_assert!((d_world - d_body).abs() < 1e-9);
    }

    /// Angle wrap is idempotent and lands in [-pi, pi).
    #[test]
    fn wrap_angle_contract(a in -100.0f64..100.0) {
        let w = wrap_angle(a);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
        prop_assert!((wrap_angle(w) - w).abs() < 1e-12);
    }
}
