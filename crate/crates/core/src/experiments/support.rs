//! Disjointness of two transported disks from tracked boundary particles.

use std::f64::consts::{PI, TAU};

use crate::spectral::wrap_difference;

/// Particles tracked on the boundary circle of a support ball.
pub const BOUNDARY_POINTS: usize = 128;

/// `count` equally spaced points on the circle of `radius` about `center`.
pub fn circle_points(center: [f64; 2], radius: f64, count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|j| {
            let a = TAU * j as f64 / count as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

/// Image of a disk: the image of its center and of its boundary circle, unwrapped about the center.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportedDisk {
    pub center: [f64; 2],
    pub boundary: Vec<[f64; 2]>,
}

impl TransportedDisk {
    /// Unwraps torus positions so that the boundary is continuous around `center`.
    pub fn new(center: [f64; 2], boundary: &[[f64; 2]]) -> Self {
        let boundary = boundary
            .iter()
            .map(|p| {
                [
                    center[0] + wrap_difference(p[0] - center[0]),
                    center[1] + wrap_difference(p[1] - center[1]),
                ]
            })
            .collect();
        Self { center, boundary }
    }

    fn shifted(&self, d: [f64; 2]) -> Self {
        let s = |p: &[f64; 2]| [p[0] + d[0], p[1] + d[1]];
        Self {
            center: s(&self.center),
            boundary: self.boundary.iter().map(s).collect(),
        }
    }

    /// Largest distance from the center to the boundary.
    pub fn radius(&self) -> f64 {
        self.boundary
            .iter()
            .map(|p| (p[0] - self.center[0]).hypot(p[1] - self.center[1]))
            .fold(0.0, f64::max)
    }

    fn contains(&self, q: [f64; 2]) -> bool {
        let b = &self.boundary;
        let mut inside = false;
        let mut j = b.len() - 1;
        for i in 0..b.len() {
            let (pi, pj) = (b[i], b[j]);
            if (pi[1] > q[1]) != (pj[1] > q[1]) {
                let x = pj[0] + (q[1] - pj[1]) * (pi[0] - pj[0]) / (pi[1] - pj[1]);
                if q[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

fn planar_disjoint(a: &TransportedDisk, b: &TransportedDisk) -> bool {
    let dist = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
    if dist > a.radius() + b.radius() {
        return true;
    }
    if a.contains(b.center) || b.contains(a.center) {
        return false;
    }
    let n = a.boundary.len();
    let m = b.boundary.len();
    for i in 0..n {
        let (p1, p2) = (a.boundary[i], a.boundary[(i + 1) % n]);
        for j in 0..m {
            if segments_cross(p1, p2, b.boundary[j], b.boundary[(j + 1) % m]) {
                return false;
            }
        }
    }
    true
}

/// Whether the two transported disks are disjoint on the torus (all nearby periodic copies checked).
pub fn disks_disjoint(a: &TransportedDisk, b: &TransportedDisk) -> bool {
    let base = [
        a.center[0] + wrap_difference(b.center[0] - a.center[0]) - b.center[0],
        a.center[1] + wrap_difference(b.center[1] - a.center[1]) - b.center[1],
    ];
    let reach = ((a.radius() + b.radius()) / TAU).ceil() as i64 + 1;
    for i in -reach..=reach {
        for j in -reach..=reach {
            let shift = [base[0] + TAU * i as f64, base[1] + TAU * j as f64];
            let copy = b.shifted(shift);
            let gap = (copy.center[0] - a.center[0]).hypot(copy.center[1] - a.center[1]);
            if gap > a.radius() + copy.radius() + PI * 1e-12 {
                continue;
            }
            if !planar_disjoint(a, &copy) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(c: [f64; 2], r: f64) -> TransportedDisk {
        TransportedDisk::new(c, &circle_points(c, r, 64))
    }

    #[test]
    fn separated_and_overlapping_circles() {
        assert!(disks_disjoint(
            &disk([1.0, 1.0], 0.2),
            &disk([1.5, 1.0], 0.2)
        ));
        assert!(!disks_disjoint(
            &disk([1.0, 1.0], 0.2),
            &disk([1.3, 1.0], 0.2)
        ));
        assert!(!disks_disjoint(
            &disk([1.0, 1.0], 0.5),
            &disk([1.1, 1.0], 0.1)
        ));
    }

    #[test]
    fn overlap_across_the_periodic_seam() {
        assert!(!disks_disjoint(
            &disk([0.05, 3.0], 0.2),
            &disk([TAU - 0.05, 3.0], 0.2)
        ));
        assert!(disks_disjoint(
            &disk([0.3, 3.0], 0.1),
            &disk([TAU - 0.3, 3.0], 0.1)
        ));
    }

    #[test]
    fn boundary_is_unwrapped() {
        let c = [0.01, 0.01];
        let raw: Vec<[f64; 2]> = circle_points(c, 0.1, 16)
            .iter()
            .map(|p| [p[0].rem_euclid(TAU), p[1].rem_euclid(TAU)])
            .collect();
        assert!((TransportedDisk::new(c, &raw).radius() - 0.1).abs() < 1e-12);
    }
}
