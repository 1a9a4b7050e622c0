//! Matrix-valued fractions of one complex variable from node values.
//!
//! Storey `k` is `l_k(Δ) = Δ·B_k` with `B_k = [F_k(u_k) − F_k(u_{k−1})] / (u_k − u_{k−1})`,
//! where `F_k` is the level function from [`crate::fraction::level_value`]. Level `k` only
//! uses nodes `u_0..u_k`, so building on a prefix of the nodes gives a prefix of the storeys.

use crate::algebra::{Matrix, Scalar};
use crate::error::{Error, Result};
use crate::fraction::{self, ArgPoint, InverseSide, Payload, Storey, ThieleFraction};

/// Relative tolerance below which two float nodes count as equal.
pub const DEDUP_TOL: f64 = 1e-12;

/// Interpolation data `F(u_0), …, F(u_n)` at scalar nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeData<S> {
    nodes: Vec<S>,
    values: Vec<Matrix<S>>,
}

impl<S: Scalar> NodeData<S> {
    pub fn new(nodes: Vec<S>, values: Vec<Matrix<S>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invalid("at least one node is required".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::Invalid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        let m = values[0].dim();
        for v in &values {
            if v.dim() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: v.dim(),
                });
            }
        }
        let scale = nodes.iter().map(S::modulus).fold(0.0, f64::max);
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let d = nodes[i].clone() - nodes[j].clone();
                let same = match S::BACKEND {
                    crate::Backend::Exact => d.is_zero(),
                    crate::Backend::Float => d.modulus() <= DEDUP_TOL * scale,
                };
                if same {
                    return Err(Error::DuplicateNodes {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[S] {
        &self.nodes
    }

    pub fn values(&self) -> &[Matrix<S>] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values[0].dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The first `k + 1` nodes.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            nodes: self.nodes[..=k].to_vec(),
            values: self.values[..=k].to_vec(),
        }
    }
}

/// Builds with the left-inverse orientation, `T = F(u_0) + R⁻¹·l_1`.
pub fn build_scalar<S: Scalar>(data: &NodeData<S>) -> Result<ThieleFraction<S>> {
    build_scalar_with(data, InverseSide::Left)
}

pub fn build_scalar_with<S: Scalar>(
    data: &NodeData<S>,
    side: InverseSide,
) -> Result<ThieleFraction<S>> {
    let points: Vec<ArgPoint<S>> = data.nodes.iter().cloned().map(ArgPoint::Scalar).collect();
    let base = data.values[0].clone();
    let mut storeys: Vec<Storey<S>> = Vec::with_capacity(data.len() - 1);
    for k in 1..data.len() {
        let lo = level_value_with(data, &storeys, side, k, k - 1)?;
        let hi = level_value_with(data, &storeys, side, k, k)?;
        let step = (data.nodes[k].clone() - data.nodes[k - 1].clone())
            .recip()
            .ok_or(Error::DuplicateNodes {
                first: k - 1,
                second: k,
            })?;
        let coeff = hi.sub(&lo)?.scale(&step);
        storeys.push(Storey::new(k, points[k - 1].clone(), Payload::Scalar(coeff))?);
    }
    ThieleFraction::new(side, base, points, storeys)
}

/// `F_k(u_node)` given the storeys `l_1..l_{k−1}` already built.
pub fn level_value<S: Scalar>(
    data: &NodeData<S>,
    built: &[Storey<S>],
    k: usize,
    node: usize,
) -> Result<Matrix<S>> {
    level_value_with(data, built, InverseSide::Left, k, node)
}

fn level_value_with<S: Scalar>(
    data: &NodeData<S>,
    built: &[Storey<S>],
    side: InverseSide,
    k: usize,
    node: usize,
) -> Result<Matrix<S>> {
    if node >= data.len() {
        return Err(Error::Invalid(format!("node index {node} out of range")));
    }
    fraction::level_value(
        side,
        &data.values[0],
        &data.values[node],
        &ArgPoint::Scalar(data.nodes[node].clone()),
        built,
        k,
        Some(node),
    )
}

/// Classic scalar Thiele interpolant evaluated at `probe`, via reciprocal differences.
///
/// `ρ_0(x_i) = f_i`, `ρ_1(x_i, x_{i+1}) = (x_i − x_{i+1}) / (f_i − f_{i+1})`,
/// `ρ_k(x_i..x_{i+k}) = (x_i − x_{i+k}) / (ρ_{k−1}(x_i..) − ρ_{k−1}(x_{i+1}..)) + ρ_{k−2}(x_{i+1}..)`,
/// and `f(x) = f_0 + (x − x_0) / (ρ_1 + (x − x_1) / (ρ_2 − ρ_0 + (x − x_2) / (ρ_3 − ρ_1 + …)))`.
pub fn classic_thiele_oracle<S: Scalar>(points: &[(S, S)], probe: &S) -> Result<S> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Invalid("no interpolation points".into()));
    }
    // table[k][i] = ρ_k(x_i, …, x_{i+k})
    let mut table: Vec<Vec<S>> = vec![points.iter().map(|(_, f)| f.clone()).collect()];
    for k in 1..n {
        let prev = &table[k - 1];
        let mut row = Vec::with_capacity(n - k);
        for i in 0..n - k {
            let num = points[i].0.clone() - points[i + k].0.clone();
            let den = prev[i].clone() - prev[i + 1].clone();
            let Some(mut r) = num.div(&den) else {
                // An infinite reciprocal difference ends the fraction early, which is
                // only consistent if the shorter fraction already fits every point.
                return truncated_fit(&table, points, k - 1, probe)
                    .ok_or(Error::Breakdown { order: k });
            };
            if k >= 2 {
                r = r + table[k - 2][i + 1].clone();
            }
            row.push(r);
        }
        table.push(row);
    }
    thiele_fold(&table, points, n - 1, probe)
}

fn truncated_fit<S: Scalar>(table: &[Vec<S>], points: &[(S, S)], depth: usize, probe: &S) -> Option<S> {
    for (x, f) in points {
        let v = thiele_fold(table, points, depth, x).ok()?;
        let d = (v - f.clone()).modulus();
        let fits = match S::BACKEND {
            crate::Backend::Exact => d == 0.0,
            crate::Backend::Float => d <= 1e-12 * f.modulus().max(1.0),
        };
        if !fits {
            return None;
        }
    }
    thiele_fold(table, points, depth, probe).ok()
}

// f_0 + (x − x_0)/(a_1 + (x − x_1)/(a_2 + …)), a_1 = ρ_1, a_k = ρ_k − ρ_{k−2}.
fn thiele_fold<S: Scalar>(table: &[Vec<S>], points: &[(S, S)], depth: usize, x: &S) -> Result<S> {
    let rho = |k: usize| table[k][0].clone();
    let mut tail: Option<S> = None;
    for k in (1..=depth).rev() {
        let a_k = if k >= 2 { rho(k) - rho(k - 2) } else { rho(1) };
        tail = Some(match tail {
            None => a_k,
            Some(t) => {
                let dx = x.clone() - points[k].0.clone();
                a_k + dx.div(&t).ok_or(Error::Breakdown { order: k + 1 })?
            }
        });
    }
    match tail {
        None => Ok(rho(0)),
        Some(t) => {
            let dx = x.clone() - points[0].0.clone();
            Ok(rho(0) + dx.div(&t).ok_or(Error::Breakdown { order: 1 })?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Complex64 as C, GaussianRational as Q};
    use crate::fixtures;

    fn q(re: i64, im: i64) -> Q {
        Q::from_ints(re, im)
    }

    #[test]
    fn single_node_gives_constant() {
        let data = NodeData::new(vec![q(3, 0)], vec![Matrix::identity(2)]).unwrap();
        let f = build_scalar(&data).unwrap();
        assert_eq!(f.depth(), 0);
        assert_eq!(f.evaluate(&ArgPoint::Scalar(q(9, 9))).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn duplicate_nodes_are_rejected() {
        let v = Matrix::<Q>::identity(1);
        let err = NodeData::new(vec![q(0, 0), q(1, 0), q(0, 0)], vec![v.clone(), v.clone(), v]).unwrap_err();
        assert_eq!(err, Error::DuplicateNodes { first: 0, second: 2 });

        let w = Matrix::<C>::identity(1);
        let err = NodeData::new(vec![C::new(1.0, 0.0), C::new(1.0 + 1e-14, 0.0)], vec![w.clone(), w]).unwrap_err();
        assert_eq!(err, Error::DuplicateNodes { first: 0, second: 1 });
    }

    #[test]
    fn mismatched_lengths_and_dims_are_rejected() {
        assert!(NodeData::new(vec![q(0, 0)], vec![]).is_err());
        assert!(NodeData::new(vec![q(0, 0), q(1, 0)], vec![Matrix::identity(1), Matrix::identity(2)]).is_err());
    }

    #[test]
    fn first_level_is_the_data() {
        let data = fixtures::example1_exact();
        for j in 0..3 {
            assert_eq!(level_value(&data, &[], 1, j).unwrap(), data.values()[j]);
        }
        assert!(matches!(
            level_value(&data, &[], 2, 1),
            Err(Error::LevelOutOfRange { level: 2, max: 1 })
        ));
    }

    #[test]
    fn second_level_at_u1_is_identity() {
        let data = fixtures::example1_exact();
        let f = build_scalar(&data).unwrap();
        let l1 = &f.storeys()[..1];
        assert_eq!(level_value(&data, l1, 2, 1).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn example1_nodes_exact() {
        let data = fixtures::example1_exact();
        let f = build_scalar(&data).unwrap();
        let res = f.verify_nodal(data.values()).unwrap();
        assert!(res.iter().all(|r| r.value == 0.0 && r.error.is_none()));
        let one = f.truncate(1).unwrap();
        assert_eq!(one.evaluate(&ArgPoint::Scalar(q(0, 0))).unwrap(), data.values()[1]);
    }

    #[test]
    fn right_orientation_also_reproduces_example1() {
        let data = fixtures::example1_exact();
        let left = build_scalar_with(&data, InverseSide::Left).unwrap();
        let right = build_scalar_with(&data, InverseSide::Right).unwrap();
        for z in [q(2, 0), q(0, 1), Q::from_ratio((1, 3), (-5, 7))] {
            let u = ArgPoint::Scalar(z.clone());
            let want = fixtures::example1_closed_form(&z).unwrap();
            assert_eq!(left.evaluate(&u).unwrap(), want);
            assert_eq!(right.evaluate(&u).unwrap(), want);
        }
    }

    #[test]
    fn mixed_orientation_fails_to_interpolate() {
        // Right-inverse level functions evaluated with l·R⁻¹ miss F(u_2).
        let data = fixtures::example1_exact();
        let left = build_scalar_with(&data, InverseSide::Left).unwrap();
        let mixed = ThieleFraction::new(
            InverseSide::Right,
            left.base().clone(),
            left.nodes().to_vec(),
            left.storeys().to_vec(),
        )
        .unwrap();
        let at_u2 = mixed.evaluate(&mixed.nodes()[2]).unwrap();
        assert_ne!(at_u2, data.values()[2]);
    }

    #[test]
    fn oracle_constant_and_two_point() {
        let pts = vec![(q(0, 0), q(3, 0)), (q(1, 0), q(3, 0)), (q(2, 0), q(3, 0))];
        assert_eq!(classic_thiele_oracle(&pts, &q(7, 0)).unwrap(), q(3, 0));
        assert_eq!(classic_thiele_oracle(&pts[..1], &q(7, 0)).unwrap(), q(3, 0));

        // Same reciprocal-difference breakdown, but data no constant fits.
        let bad = vec![(q(0, 0), q(1, 0)), (q(1, 0), q(1, 0)), (q(2, 0), q(4, 0))];
        assert_eq!(classic_thiele_oracle(&bad, &q(7, 0)), Err(Error::Breakdown { order: 1 }));

        let two = vec![(q(1, 0), q(2, 0)), (q(3, 0), q(8, 0))];
        assert_eq!(classic_thiele_oracle(&two, &q(1, 0)).unwrap(), q(2, 0));
        assert_eq!(classic_thiele_oracle(&two, &q(3, 0)).unwrap(), q(8, 0));
        assert_eq!(classic_thiele_oracle(&two, &q(2, 0)).unwrap(), q(5, 0));
    }

    // (a + b x) / (1 + c x) through three points, solved by Cramer's rule.
    fn brute_force_one_one(pts: &[(f64, f64); 3], x: f64) -> f64 {
        // a + b x_i − c x_i f_i = f_i
        let rows: Vec<[f64; 3]> = pts.iter().map(|&(xi, fi)| [1.0, xi, -xi * fi]).collect();
        let rhs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let a = [rows[0], rows[1], rows[2]];
        let d = det3(a);
        let solve = |col: usize| {
            let mut m = a;
            for r in 0..3 {
                m[r][col] = rhs[r];
            }
            det3(m) / d
        };
        let (ca, cb, cc) = (solve(0), solve(1), solve(2));
        (ca + cb * x) / (1.0 + cc * x)
    }

    #[test]
    fn oracle_matches_brute_force_one_one_rational() {
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 5.0)];
        let cpts: Vec<(C, C)> = pts.iter().map(|&(x, f)| (C::new(x, 0.0), C::new(f, 0.0))).collect();
        for x in [4.0, 1.5, -2.0, 10.0] {
            let want = brute_force_one_one(&pts, x);
            let got = classic_thiele_oracle(&cpts, &C::new(x, 0.0)).unwrap();
            assert!((got.re - want).abs() <= 1e-12 * want.abs().max(1.0), "{x}: {got} vs {want}");
        }
        // The interpolant is (3 + x)/(3 − x): probe 3 sits on its pole.
        let qpts: Vec<(Q, Q)> = [(0, 1), (1, 2), (2, 5)].iter().map(|&(x, f)| (q(x, 0), q(f, 0))).collect();
        assert!(classic_thiele_oracle(&qpts, &q(3, 0)).is_err());
    }

    #[test]
    fn builder_matches_oracle_on_one_by_one_data() {
        let pts = [(0, 1), (1, 2), (2, 5)];
        let data = NodeData::new(
            pts.iter().map(|&(x, _)| q(x, 0)).collect(),
            pts.iter().map(|&(_, f)| Matrix::diag(vec![q(f, 0)])).collect(),
        )
        .unwrap();
        let f = build_scalar(&data).unwrap();
        let qpts: Vec<(Q, Q)> = pts.iter().map(|&(x, f)| (q(x, 0), q(f, 0))).collect();
        for z in [q(4, 0), Q::from_ratio((3, 2), (1, 5)), q(-7, 2)] {
            let t = f.evaluate(&ArgPoint::Scalar(z.clone())).unwrap();
            assert_eq!(*t.get(0, 0), classic_thiele_oracle(&qpts, &z).unwrap());
        }
        assert_eq!(
            f.evaluate(&ArgPoint::Scalar(q(3, 0))),
            Err(Error::TailSingular { level: 2 })
        );
    }

    #[test]
    fn prefix_build_equals_truncation() {
        let data = fixtures::example1_exact();
        let full = build_scalar(&data).unwrap();
        for k in 0..data.len() {
            assert_eq!(build_scalar(&data.prefix(k)).unwrap(), full.truncate(k).unwrap());
        }
    }
}
