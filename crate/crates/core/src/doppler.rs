//! Averaging over the one-dimensional Maxwell–Boltzmann distribution
//! w(vz) = exp(−vz²/vp²)/(vp·√π) by Gauss–Hermite quadrature.

use rayon::prelude::*;

use crate::bloch::{steady_state, DensityMatrixState};
use crate::error::{invalid, Result, SimError};
use crate::medium::{AtomicMedium, FieldState};

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 64;

/// Velocity nodes (cm/s) and normalised weights.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Hermite nodes and weights for the weight function exp(−x²),
/// by Newton iteration on the orthonormal Hermite recurrence.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// Quadrature grid matched to w(vz) with most probable speed `vp`.
pub fn velocity_grid(vp: f64, n: usize) -> Result<VelocityGrid> {
    if n == 0 {
        return Err(invalid("velocity nodes", "at least one node is required"));
    }
    if !(vp >= 0.0) || !vp.is_finite() {
        return Err(invalid("vp", format!("must be non-negative, got {vp}")));
    }
    if vp == 0.0 || n == 1 {
        return Ok(VelocityGrid {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    let (x, w) = gauss_hermite(n);
    let total: f64 = w.iter().sum();
    Ok(VelocityGrid {
        nodes: x.iter().map(|xi| vp * xi).collect(),
        weights: w.iter().map(|wi| wi / total).collect(),
    })
}

/// Velocity-averaged steady state.
///
/// Nodes are solved in parallel and summed in node order, so the result is
/// bit-reproducible regardless of thread scheduling.
pub fn averaged_coherences(
    medium: &AtomicMedium,
    fields: &FieldState,
    grid: &VelocityGrid,
) -> Result<DensityMatrixState> {
    let per_node: Vec<Result<DensityMatrixState>> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(index, &vz)| {
            steady_state(medium, fields, vz).map_err(|e| SimError::VelocityNode {
                index,
                velocity: vz,
                source: Box::new(e),
            })
        })
        .collect();
    let mut acc = DensityMatrixState::default();
    for (state, &w) in per_node.into_iter().zip(grid.weights.iter()) {
        acc = acc.add_scaled(w, &state?);
    }
    Ok(acc)
}
