//! Built-in test problems and problem resolution for the command line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::densela::{matvec, DenseMatrix, DenseVector, LinalgError, Scalar};
use crate::matrix_market::{load_matrix_market, load_vector, MatrixMarketError};
use crate::oracle::{index_of, inverse, OracleError, DEFAULT_RANK_TOL};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("unknown example '{0}' (expected ex1, ex2, ex3 or ex4)")]
    UnknownExample(String),
    #[error("a matrix file needs a right-hand side (--rhs <file> or --ones)")]
    MissingRhs,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{what} has length {found}, expected {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    MatrixMarket(#[from] MatrixMarketError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex4];
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExampleId::Ex1 => "ex1",
            ExampleId::Ex2 => "ex2",
            ExampleId::Ex3 => "ex3",
            ExampleId::Ex4 => "ex4",
        };
        f.write_str(s)
    }
}

impl FromStr for ExampleId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ex1" => Ok(ExampleId::Ex1),
            "ex2" => Ok(ExampleId::Ex2),
            "ex3" => Ok(ExampleId::Ex3),
            "ex4" => Ok(ExampleId::Ex4),
            other => Err(ProblemError::UnknownExample(other.to_string())),
        }
    }
}

/// A matrix, right-hand side and the index of the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub index_a: usize,
}

/// 12 x 12 Jordan matrix with eigenvalue blocks J3(1), J3(3), 7, 8, J2(9)
/// and the nilpotent block J2(0); `a77` replaces the diagonal entry 7.
fn jordan_example(a77: f64) -> DenseMatrix {
    let diag = [1.0, 1.0, 1.0, 3.0, 3.0, 3.0, a77, 8.0, 9.0, 9.0, 0.0, 0.0];
    let mut m = DenseMatrix::zeros(12, 12);
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] = Scalar::new(*d, 0.0);
    }
    for (i, j) in [(0, 1), (1, 2), (3, 4), (4, 5), (8, 9), (10, 11)] {
        m[(i, j)] = Scalar::new(1.0, 0.0);
    }
    m
}

pub fn generate_example(id: ExampleId) -> Example {
    match id {
        ExampleId::Ex1 | ExampleId::Ex2 | ExampleId::Ex3 => {
            let a77 = match id {
                ExampleId::Ex1 => 7.0,
                ExampleId::Ex2 => 1000.0,
                _ => 0.001,
            };
            Example {
                a: jordan_example(a77),
                b: DenseVector::ones(12),
                index_a: 2,
            }
        }
        ExampleId::Ex4 => Example {
            a: DenseMatrix::from_real_rows(&[
                [1.0, 1.0, 1.0, 2.0],
                [0.0, 1.0, 3.0, 4.0],
                [0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 0.0, 0.0],
            ]),
            b: DenseVector::from_real(&[-4.0, 7.0, 1.0, 0.0]),
            index_a: 1,
        },
    }
}

/// `S A S^{-1}` and `S b` with `S = I + 0.1 R`, `R` uniform in `[-1, 1]`
/// from a seeded ChaCha generator. Leaves the index unchanged.
pub fn apply_similarity(
    a: &DenseMatrix,
    b: &DenseVector,
    seed: u64,
) -> Result<(DenseMatrix, DenseVector), ProblemError> {
    let n = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = DenseMatrix::from_fn(n, n, |i, j| {
        let r: f64 = rng.gen_range(-1.0..1.0);
        Scalar::new(if i == j { 1.0 } else { 0.0 } + 0.1 * r, 0.0)
    });
    let s_inv = inverse(&s)?;
    Ok((s.matmul(a)?.matmul(&s_inv)?, matvec(&s, b)?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    Example(ExampleId),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RhsChoice {
    /// The example's own right-hand side.
    Default,
    Ones,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexChoice {
    Given(usize),
    Auto,
}

impl FromStr for IndexChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(IndexChoice::Auto);
        }
        s.parse()
            .map(IndexChoice::Given)
            .map_err(|_| format!("expected a non-negative integer or 'auto', got '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum X0Choice {
    Zero,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub source: MatrixSource,
    pub rhs: RhsChoice,
    pub index: IndexChoice,
    pub x0: X0Choice,
    pub similarity_seed: Option<u64>,
}

impl ProblemSpec {
    pub fn example(id: ExampleId) -> Self {
        ProblemSpec {
            source: MatrixSource::Example(id),
            rhs: RhsChoice::Default,
            index: IndexChoice::Auto,
            x0: X0Choice::Zero,
            similarity_seed: None,
        }
    }
}

/// A fully loaded problem ready to solve.
#[derive(Clone, Debug)]
pub struct Problem {
    pub label: String,
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub x0: DenseVector,
    pub index_a: usize,
    /// `index_of(A)` when it was computed (for `auto`, or on request).
    pub computed_index: Option<usize>,
}

impl Problem {
    pub fn from_parts(label: impl Into<String>, a: DenseMatrix, b: DenseVector, index_a: usize) -> Self {
        let x0 = DenseVector::zeros(b.len());
        Problem {
            label: label.into(),
            a,
            b,
            x0,
            index_a,
            computed_index: None,
        }
    }
}

/// Loads and validates everything a [`ProblemSpec`] refers to. With
/// `check_index`, the index is computed even when it was given explicitly.
pub fn resolve(spec: &ProblemSpec, check_index: bool) -> Result<Problem, ProblemError> {
    let (label, a, default_b) = match &spec.source {
        MatrixSource::Example(id) => {
            let ex = generate_example(*id);
            (id.to_string(), ex.a, Some(ex.b))
        }
        MatrixSource::File(path) => (path.display().to_string(), load_matrix_market(path)?, None),
    };
    if !a.is_square() {
        return Err(ProblemError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let b = match &spec.rhs {
        RhsChoice::Default => default_b.ok_or(ProblemError::MissingRhs)?,
        RhsChoice::Ones => DenseVector::ones(n),
        RhsChoice::File(path) => load_vector(path)?,
    };
    if b.len() != n {
        return Err(ProblemError::Length {
            what: "right-hand side",
            expected: n,
            found: b.len(),
        });
    }
    let x0 = match &spec.x0 {
        X0Choice::Zero => DenseVector::zeros(n),
        X0Choice::File(path) => load_vector(path)?,
    };
    if x0.len() != n {
        return Err(ProblemError::Length {
            what: "initial guess",
            expected: n,
            found: x0.len(),
        });
    }
    let (a, b) = match spec.similarity_seed {
        Some(seed) => apply_similarity(&a, &b, seed)?,
        None => (a, b),
    };
    let computed_index = if check_index || spec.index == IndexChoice::Auto {
        Some(index_of(&a, DEFAULT_RANK_TOL)?)
    } else {
        None
    };
    let index_a = match spec.index {
        IndexChoice::Given(i) => i,
        IndexChoice::Auto => computed_index.expect("computed above"),
    };
    Ok(Problem {
        label,
        a,
        b,
        x0,
        index_a,
        computed_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_shapes_and_entries() {
        let ex1 = generate_example(ExampleId::Ex1);
        assert_eq!((ex1.a.rows(), ex1.a.cols()), (12, 12));
        assert_eq!(ex1.a[(6, 6)], Scalar::new(7.0, 0.0));
        assert_eq!(ex1.b, DenseVector::ones(12));
        let ex4 = generate_example(ExampleId::Ex4);
        assert_eq!(ex4.b, DenseVector::from_real(&[-4.0, 7.0, 1.0, 0.0]));
        assert_eq!(ex4.index_a, 1);
    }

    #[test]
    fn ex2_and_ex3_differ_from_ex1_in_one_entry() {
        let ex1 = generate_example(ExampleId::Ex1).a;
        for (id, v) in [(ExampleId::Ex2, 1000.0), (ExampleId::Ex3, 0.001)] {
            let other = generate_example(id).a;
            let diff = other.sub(&ex1).unwrap();
            let nonzero: Vec<_> = (0..12)
                .flat_map(|i| (0..12).map(move |j| (i, j)))
                .filter(|&(i, j)| diff[(i, j)].norm() != 0.0)
                .collect();
            assert_eq!(nonzero, vec![(6, 6)]);
            assert_eq!(other[(6, 6)], Scalar::new(v, 0.0));
        }
    }

    #[test]
    fn auto_index_matches_stated_values() {
        for id in ExampleId::ALL {
            let p = resolve(&ProblemSpec::example(id), false).unwrap();
            assert_eq!(Some(p.index_a), p.computed_index);
            assert_eq!(p.index_a, generate_example(id).index_a);
        }
    }

    #[test]
    fn examples_are_deterministic() {
        for id in ExampleId::ALL {
            assert_eq!(generate_example(id), generate_example(id));
        }
    }

    #[test]
    fn similarity_preserves_index_and_is_reproducible() {
        let ex = generate_example(ExampleId::Ex4);
        let (a1, b1) = apply_similarity(&ex.a, &ex.b, 3).unwrap();
        let (a2, _) = apply_similarity(&ex.a, &ex.b, 3).unwrap();
        assert_eq!(a1, a2);
        assert_ne!(a1, ex.a);
        assert_eq!(b1.len(), 4);
        assert_eq!(index_of(&a1, DEFAULT_RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn parse_choices() {
        assert_eq!("auto".parse::<IndexChoice>().unwrap(), IndexChoice::Auto);
        assert_eq!("2".parse::<IndexChoice>().unwrap(), IndexChoice::Given(2));
        assert!("-1".parse::<IndexChoice>().is_err());
        assert!(matches!(
            "ex9".parse::<ExampleId>(),
            Err(ProblemError::UnknownExample(_))
        ));
    }
}
