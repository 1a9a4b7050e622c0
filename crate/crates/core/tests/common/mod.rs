//! Random node data shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use thiele_core::algebra::{Complex64, GaussianRational, Matrix};
use thiele_core::scalar_builder::NodeData;

/// Complex number with modulus in `[0.5, 2]` and uniform phase.
pub fn unit_scale_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn random_float_matrix<R: Rng>(rng: &mut R, m: usize) -> Matrix<Complex64> {
    Matrix::from_fn(m, |_, _| unit_scale_complex(rng))
}

/// Distinct complex nodes in the square `[-2, 2]²`.
pub fn random_float_nodes<R: Rng>(rng: &mut R, count: usize) -> Vec<Complex64> {
    let mut nodes: Vec<Complex64> = Vec::with_capacity(count);
    while nodes.len() < count {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if nodes.iter().all(|w| (w - z).norm() > 0.1) {
            nodes.push(z);
        }
    }
    nodes
}

pub fn random_float_data<R: Rng>(rng: &mut R, m: usize, count: usize) -> NodeData<Complex64> {
    let nodes = random_float_nodes(rng, count);
    let values = (0..count).map(|_| random_float_matrix(rng, m)).collect();
    NodeData::new(nodes, values).expect("distinct nodes")
}

/// Small Gaussian rational with numerators in `[-5, 5]` and denominators in `[1, 4]`.
pub fn small_rational<R: Rng>(rng: &mut R) -> GaussianRational {
    GaussianRational::from_ratio(
        (rng.gen_range(-5..=5), rng.gen_range(1..=4)),
        (rng.gen_range(-5..=5), rng.gen_range(1..=4)),
    )
}

pub fn random_exact_data<R: Rng>(rng: &mut R, m: usize, count: usize) -> NodeData<GaussianRational> {
    let mut nodes: Vec<GaussianRational> = Vec::with_capacity(count);
    while nodes.len() < count {
        let z = small_rational(rng);
        if !nodes.contains(&z) {
            nodes.push(z);
        }
    }
    let values = (0..count)
        .map(|_| Matrix::from_fn(m, |_, _| small_rational(rng)))
        .collect();
    NodeData::new(nodes, values).expect("distinct nodes")
}

pub fn data_scale<S: thiele_core::Scalar>(values: &[Matrix<S>]) -> f64 {
    values.iter().map(Matrix::norm).fold(1.0, f64::max)
}
