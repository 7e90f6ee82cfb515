//! Space-time trajectories: one complex field per time snapshot, flat storage.

use crate::grid::{Field, SpatialGrid};
use num_complex::Complex64;

/// Row-major [time][space] samples of a field trajectory.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub data: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: SpatialGrid, times: Vec<f64>) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); times.len() * grid.n()];
        SpaceTimeField { grid, times, data }
    }

    pub fn snapshots(&self) -> usize {
        self.times.len()
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        let n = self.grid.n();
        &self.data[m * n..(m + 1) * n]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [Complex64] {
        let n = self.grid.n();
        &mut self.data[m * n..(m + 1) * n]
    }

    pub fn field_at(&self, m: usize) -> Field {
        Field {
            grid: self.grid,
            values: self.row(m).to_vec(),
        }
    }

    pub fn set_row(&mut self, m: usize, field: &Field) {
        assert_eq!(field.grid, self.grid);
        self.row_mut(m).copy_from_slice(&field.values);
    }

    /// Trace along x = 0.
    /// Copy a contiguous block of snapshots, rebasing time to start at zero.
    pub fn window(&self, start_row: usize, rows: usize) -> SpaceTimeField {
        let n = self.grid.n();
        assert!(start_row + rows <= self.snapshots());
        let t0 = self.times[start_row];
        SpaceTimeField {
            grid: self.grid,
            times: self.times[start_row..start_row + rows]
                .iter()
                .map(|&t| t - t0)
                .collect(),
            data: self.data[start_row * n..(start_row + rows) * n].to_vec(),
        }
    }

    pub fn origin_trace(&self) -> Vec<Complex64> {
        let o = self.grid.origin_index();
        (0..self.snapshots()).map(|m| self.row(m)[o]).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn imag_sup(&self) -> f64 {
        self.data.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Drops every imaginary part, returning the largest one seen.
    pub fn project_real(&mut self) -> f64 {
        let mut sup: f64 = 0.0;
        for v in self.data.iter_mut() {
            sup = sup.max(v.im.abs());
            v.im = 0.0;
        }
        sup
    }

    pub fn add_assign(&mut self, other: &SpaceTimeField) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &SpaceTimeField) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    pub fn scale_assign(&mut self, c: Complex64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }

    /// Space-time L^2 norm over x >= 0, trapezoid in t, trapezoid on [0, L].
    pub fn l2_halfline_spacetime(&self) -> f64 {
        let m = self.snapshots();
        assert!(m >= 2);
        let dt = self.times[1] - self.times[0];
        let mut acc = 0.0;
        for i in 0..m {
            let wt = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            let f = self.field_at(i);
            let r = f.l2_norm_halfline();
            acc += wt * r * r * dt;
        }
        acc.sqrt()
    }

    /// Relative half-line space-time L^2 distance to another trajectory.
    pub fn rel_l2_halfline_distance(&self, other: &SpaceTimeField) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        let mut diff = self.clone();
        diff.sub_assign(other);
        let denom = other.l2_halfline_spacetime();
        if denom == 0.0 {
            diff.l2_halfline_spacetime()
        } else {
            diff.l2_halfline_spacetime() / denom
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rows_and_traces() {
        let grid = SpatialGrid::new(2.0, 8);
        let times = vec![0.0, 0.5, 1.0];
        let mut f = SpaceTimeField::zeros(grid, times);
        for m in 0..3 {
            let field = Field::from_fn(grid, |x| Complex64::new(x + m as f64, 0.0));
            f.set_row(m, &field);
        }
        assert_eq!(f.origin_trace()[2], Complex64::new(2.0, 0.0));
        assert_relative_eq!(f.row(1)[0].re, -2.0 + 1.0);
    }

    #[test]
    fn spacetime_norm_of_constant() {
        // |f| = 1 on x in [0, L], t in [0, 1] gives norm sqrt(L).
        let grid = SpatialGrid::new(4.0, 64);
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let mut f = SpaceTimeField::zeros(grid, times);
        for v in f.data.iter_mut() {
            *v = Complex64::new(1.0, 0.0);
        }
        assert_relative_eq!(f.l2_halfline_spacetime(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn real_projection_reports_residue() {
        let grid = SpatialGrid::new(1.0, 4);
        let mut f = SpaceTimeField::zeros(grid, vec![0.0, 1.0]);
        f.data[3] = Complex64::new(1.0, 2e-7);
        let residue = f.project_real();
        assert_relative_eq!(residue, 2e-7);
        assert_eq!(f.data[3].im, 0.0);
    }
}
