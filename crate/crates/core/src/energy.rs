//! Potentials, mutual energies and the Gauss functional.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::measure::{Field, Measure};

fn as_vector(mu: &Measure) -> DVector<f64> {
    DVector::from_column_slice(mu.weights())
}

/// U^μ = K·μ.
pub fn potential(kernel: &KernelMatrix, mu: &Measure) -> Result<Vec<f64>> {
    mu.check_len(kernel.size())?;
    Ok((kernel.entries() * as_vector(mu)).iter().copied().collect())
}

/// I(μ, ν) = μᵀKν.
pub fn mutual_energy(kernel: &KernelMatrix, mu: &Measure, nu: &Measure) -> Result<f64> {
    nu.check_len(kernel.size())?;
    let u = potential(kernel, mu)?;
    Ok(u.iter().zip(nu.weights()).map(|(a, b)| a * b).sum())
}

/// ‖μ‖² = I(μ, μ).
pub fn energy(kernel: &KernelMatrix, mu: &Measure) -> Result<f64> {
    mutual_energy(kernel, mu, mu)
}

/// Energy-norm distance ‖μ − ν‖.
pub fn strong_distance(kernel: &KernelMatrix, mu: &Measure, nu: &Measure) -> Result<f64> {
    nu.check_len(mu.len())?;
    Ok(energy(kernel, &mu.sub(nu))?.max(0.0).sqrt())
}

/// I_f(μ) = ‖μ‖² + 2∫f dμ with f = −U^ω, i.e. ‖μ‖² − 2I(μ, ω).
pub fn gauss_functional(kernel: &KernelMatrix, omega: &Measure, mu: &Measure) -> Result<f64> {
    omega.check_len(kernel.size())?;
    let u = potential(kernel, mu)?;
    let (mut self_energy, mut cross) = (0.0, 0.0);
    for ((ui, mi), oi) in u.iter().zip(mu.weights()).zip(omega.weights()) {
        self_energy += ui * mi;
        cross += ui * oi;
    }
    Ok(self_energy - 2.0 * cross)
}

/// U_f^μ = U^μ + f.
pub fn weighted_potential(kernel: &KernelMatrix, field: &Field, mu: &Measure) -> Result<Vec<f64>> {
    if field.len() != kernel.size() {
        return Err(Error::SizeMismatch {
            expected: kernel.size(),
            found: field.len(),
        });
    }
    let u = potential(kernel, mu)?;
    Ok(u.iter().zip(field.values()).map(|(a, b)| a + b).collect())
}
