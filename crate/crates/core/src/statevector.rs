//! Dense statevector kernel.
//!
//! Qubit `q` is bit `q` of the amplitude index (qubit 0 is the least
//! significant bit). Gates are applied in place by walking index pairs with
//! stride `2^q`; no full operator matrix is ever built.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 2x2 complex gate matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2x2(pub [[Complex64; 2]; 2]);

impl Unitary2x2 {
    pub fn hadamard() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Unitary2x2([[s, s], [s, -s]])
    }

    /// `diag(1, e^{i theta})`.
    pub fn phase(theta: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Unitary2x2([[one, zero], [zero, Complex64::from_polar(1.0, theta)]])
    }

    /// `exp(-i theta Y / 2)`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let s = Complex64::new(s, 0.0);
        Unitary2x2([[c, -s], [s, c]])
    }

    /// Largest entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.0;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += m[k][i].conj() * m[k][j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// Upper bound on register size; 2^24 amplitudes is 256 MiB.
    pub const MAX_QUBITS: usize = 24;

    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > Self::MAX_QUBITS {
            return Err(Error::invalid(format!(
                "n_qubits must be in 1..={}, got {n_qubits}",
                Self::MAX_QUBITS
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no
    /// normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count must be a power of two >= 2, got {len}"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > Self::MAX_QUBITS {
            return Err(Error::invalid(format!("{n_qubits} qubits exceeds limit")));
        }
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, u: &Unitary2x2, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let [[u00, u01], [u10, u11]] = u.0;
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = u00 * x0 + u01 * x1;
                *a1 = u10 * x0 + u11 * x1;
            }
        }
        Ok(())
    }

    /// Phase gates only touch the `|1>` half, so skip the full 2x2 product.
    pub fn apply_phase(&mut self, theta: f64, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let phase = Complex64::from_polar(1.0, theta);
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            for a in &mut block[stride..] {
                *a *= phase;
            }
        }
        Ok(())
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid(format!(
                "CX control and target must differ (both {control})"
            )));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amplitudes.len() {
            // Visit each swapped pair once, from its target-clear member.
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Expectation of the parity observable `Z x Z x ... x Z`.
    pub fn expect_z_all(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let p = a.norm_sqr();
                if b.count_ones() % 2 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }

    pub fn expect_z_single(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let p = a.norm_sqr();
                if b & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    /// Per-qubit `<Z_q>` readout, qubit 0 first.
    pub fn expect_z_each(&self) -> Vec<f64> {
        (0..self.n_qubits)
            .map(|q| self.expect_z_single(q).expect("qubit in range"))
            .collect()
    }
}
