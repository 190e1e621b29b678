//! Named instance specs shipped with the crate.

use super::{ChargeAtom, Geometry, InstanceSpec, KernelSpec, Regularization, ShellProfile};

fn sphere(alpha: f64, m: usize, charges: Vec<ChargeAtom>) -> InstanceSpec {
    InstanceSpec {
        dimension: 3,
        kernel: KernelSpec::Riesz { alpha },
        geometry: Geometry::Sphere {
            radius: 1.0,
            m,
            center: None,
        },
        regularization: Regularization::NearestNeighborHalf,
        charges,
    }
}

fn atom(point: [f64; 3], mass: f64) -> ChargeAtom {
    ChargeAtom {
        point: point.to_vec(),
        mass,
    }
}

/// Riesz instances with charges, each with its nominal name.
///
/// A charge enclosed by a Newtonian sphere sweeps its full mass, so the mass
/// bound is attained and that fixture needs the finer resolution to stay
/// within the discretization slack.
pub fn riesz_fixtures() -> Vec<(&'static str, InstanceSpec)> {
    vec![
        ("sphere_alpha1_outside", sphere(1.0, 400, vec![atom([2.0, 0.0, 0.0], 1.0)])),
        ("sphere_newton_outside", sphere(2.0, 400, vec![atom([0.0, 0.0, 1.5], 1.0)])),
        ("sphere_newton_inside", sphere(2.0, 1500, vec![atom([0.2, 0.1, 0.0], 0.8)])),
        (
            "sphere_newton_mixed",
            sphere(2.0, 400, vec![atom([2.0, 0.0, 0.0], 1.5), atom([0.0, -1.8, 0.3], -0.7)]),
        ),
        ("sphere_alpha25_outside", sphere(2.5, 400, vec![atom([1.3, 0.0, 0.0], 1.0)])),
        (
            "ball_newton_outside",
            InstanceSpec {
                geometry: Geometry::Ball { radius: 1.0, m: 400 },
                ..sphere(2.0, 0, vec![atom([0.0, 1.6, 0.0], 1.0)])
            },
        ),
        (
            "ball_alpha25_near",
            InstanceSpec {
                geometry: Geometry::Ball { radius: 1.0, m: 400 },
                ..sphere(2.5, 0, vec![atom([1.2, 0.0, 0.0], 1.0)])
            },
        ),
        (
            "annulus_alpha1_plane",
            InstanceSpec {
                dimension: 2,
                kernel: KernelSpec::Riesz { alpha: 1.0 },
                geometry: Geometry::Annulus {
                    inner: 0.5,
                    outer: 1.0,
                    m: 300,
                },
                regularization: Regularization::NearestNeighborHalf,
                charges: vec![ChargeAtom {
                    point: vec![0.0, 0.0],
                    mass: 1.0,
                }],
            },
        ),
    ]
}

/// Full Newtonian shells `A_j`, `j = 0..=j_max`, in `q = 2` annuli with a
/// unit charge at the origin: a not-thin family standing in for an
/// unbounded set of infinite capacity.
pub fn newtonian_shell_family(j_max: i32, per_shell: usize) -> InstanceSpec {
    InstanceSpec {
        dimension: 3,
        kernel: KernelSpec::Riesz { alpha: 2.0 },
        geometry: Geometry::ShellUnion {
            q: 2.0,
            j_min: 0,
            j_max,
            per_shell: vec![per_shell],
            profile: ShellProfile::Full,
        },
        regularization: Regularization::NearestNeighborHalf,
        charges: vec![atom([0.0, 0.0, 0.0], 1.0)],
    }
}
