use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// A real field on the periodic box [-L/2, L/2)^dim with its DFT kept in sync.
///
/// Values are stored row-major: index `i0 * n + i1` for dim = 2, where axis 0
/// is the slow index. Grid points are x_j = -L/2 + j h, h = L/n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub dim: usize,
    pub box_length: f64,
    pub grid_n: usize,
    pub values: Vec<f64>,
    /// Unnormalized forward DFT of `values`.
    pub modal: Vec<Complex64>,
}

fn fft_in_place(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    if dim == 1 {
        fft.process(data);
        return;
    }
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

impl SpectralField {
    fn check_shape(dim: usize, box_length: f64, grid_n: usize) -> Result<()> {
        if dim != 1 && dim != 2 {
            return Err(Error::Unsupported(format!("spectral fields in dimension {dim}")));
        }
        if !(box_length > 0.0) || grid_n < 4 || grid_n % 2 != 0 {
            return Err(Error::InvalidParams(format!("box L = {box_length}, n = {grid_n} (n must be even and ≥ 4)")));
        }
        Ok(())
    }

    pub fn from_values(dim: usize, box_length: f64, grid_n: usize, values: Vec<f64>) -> Result<Self> {
        Self::check_shape(dim, box_length, grid_n)?;
        if values.len() != grid_n.pow(dim as u32) {
            return Err(Error::InvalidParams(format!("expected {} values, got {}", grid_n.pow(dim as u32), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite field value".into()));
        }
        let mut modal: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut modal, dim, grid_n, false);
        Ok(SpectralField { dim, box_length, grid_n, values, modal })
    }

    /// Samples `f` at the grid points (f receives a slice of `dim` coordinates).
    pub fn from_fn<F: Fn(&[f64]) -> f64>(dim: usize, box_length: f64, grid_n: usize, f: F) -> Result<Self> {
        Self::check_shape(dim, box_length, grid_n)?;
        let h = box_length / grid_n as f64;
        let coord = |j: usize| -0.5 * box_length + j as f64 * h;
        let values = if dim == 1 {
            (0..grid_n).map(|j| f(&[coord(j)])).collect()
        } else {
            let mut v = Vec::with_capacity(grid_n * grid_n);
            for i in 0..grid_n {
                for j in 0..grid_n {
                    v.push(f(&[coord(i), coord(j)]));
                }
            }
            v
        };
        Self::from_values(dim, box_length, grid_n, values)
    }

    /// Builds the field from modal coefficients; the imaginary residue of the
    /// inverse transform is discarded.
    pub fn from_modal(dim: usize, box_length: f64, grid_n: usize, modal: Vec<Complex64>) -> Result<Self> {
        Self::check_shape(dim, box_length, grid_n)?;
        let mut buf = modal.clone();
        fft_in_place(&mut buf, dim, grid_n, true);
        let scale = 1.0 / buf.len() as f64;
        let values = buf.iter().map(|z| z.re * scale).collect();
        Ok(SpectralField { dim, box_length, grid_n, values, modal })
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.grid_n as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Signed wavenumber index for DFT index k.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.grid_n as i64;
        let k = k as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    /// |ξ|² for flat modal index `idx`.
    pub fn xi_squared(&self, idx: usize) -> f64 {
        let w = 2.0 * PI / self.box_length;
        if self.dim == 1 {
            let k = self.signed_index(idx) as f64 * w;
            k * k
        } else {
            let a = self.signed_index(idx / self.grid_n) as f64 * w;
            let b = self.signed_index(idx % self.grid_n) as f64 * w;
            a * a + b * b
        }
    }

    /// Multiplies every mode by `mult(|ξ|²)` and resynchronizes the values.
    pub fn map_modes<F: Fn(f64) -> f64>(&self, mult: F) -> Result<SpectralField> {
        let modal: Vec<Complex64> = self.modal.iter().enumerate().map(|(i, z)| z * mult(self.xi_squared(i))).collect();
        Self::from_modal(self.dim, self.box_length, self.grid_n, modal)
    }

    /// Index of the mode -k (Hermitian partner).
    fn partner(&self, idx: usize) -> usize {
        let n = self.grid_n;
        let neg = |k: usize| (n - k) % n;
        if self.dim == 1 {
            neg(idx)
        } else {
            neg(idx / n) * n + neg(idx % n)
        }
    }

    /// max |U(-k) - conj U(k)| / max |U|.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.modal.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
        (0..self.modal.len())
            .map(|i| (self.modal[self.partner(i)] - self.modal[i].conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Relative gap between Σ|u|² and Σ|U|²/n^dim.
    pub fn parseval_gap(&self) -> f64 {
        let grid: f64 = self.values.iter().map(|v| v * v).sum();
        let modal: f64 = self.modal.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.values.len() as f64;
        (grid - modal).abs() / grid.max(modal).max(f64::MIN_POSITIVE)
    }

    /// ∫ u v over the box by the trapezoid rule.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let w = self.spacing().powi(self.dim as i32);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * w
    }

    pub fn scaled(&self, lambda: f64) -> SpectralField {
        SpectralField {
            values: self.values.iter().map(|v| v * lambda).collect(),
            modal: self.modal.iter().map(|z| z * lambda).collect(),
            ..self.clone()
        }
    }

    pub fn mean(&self) -> f64 {
        self.modal[0].re / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_field_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2] {
            let n = if dim == 1 { 256 } else { 32 };
            let vals: Vec<f64> = (0..n * if dim == 1 { 1 } else { n }).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = SpectralField::from_values(dim, 10.0, n, vals.clone()).unwrap();
            assert!(f.hermitian_defect() < 1e-12);
            assert!(f.parseval_gap() < 1e-10);
            let back = SpectralField::from_modal(dim, 10.0, n, f.modal.clone()).unwrap();
            for (a, b) in back.values.iter().zip(&vals) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn shape_errors() {
        assert!(SpectralField::from_values(3, 1.0, 8, vec![0.0; 512]).is_err());
        assert!(SpectralField::from_values(1, 1.0, 7, vec![0.0; 7]).is_err());
        assert!(SpectralField::from_values(1, 1.0, 8, vec![0.0; 9]).is_err());
    }
}
