use super::{laplacian, LaplacianMatrix, WeightedDigraph};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Symmetry tolerance for spectral routines.
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;
/// Zero-eigenvalue threshold, relative to the largest eigenvalue.
const ZERO_EIG_REL: f64 = 1e-8;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-12 * max(1, ||A||_F)` or [`JACOBI_MAX_SWEEPS`] is reached.
pub fn jacobi_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric(asym));
    }
    let n = a.rows();
    let mut m = a.clone();
    let tol = JACOBI_OFF_TOL * m.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // signum(0.0) == 1.0, so theta == 0 gives the 45 degree rotation.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, p, q, c, s);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Applies `J^T M J` for the Givens rotation in the `(p, q)` plane that
/// annihilates `m[(p, q)]`.
fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
}

/// Full ascending spectrum of a symmetric Laplacian.
pub fn symmetric_spectrum(l: &LaplacianMatrix) -> Result<Vec<f64>> {
    jacobi_eigenvalues(l.entries())
}

/// Number of eigenvalues with `|lambda| <= 1e-8 * max(|lambda_max|, 1e-300)`.
pub fn zero_eigenvalue_multiplicity(spectrum: &[f64]) -> usize {
    let scale = spectrum.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return spectrum.len();
    }
    spectrum
        .iter()
        .filter(|x| x.abs() <= ZERO_EIG_REL * scale)
        .count()
}

/// Second-smallest Laplacian eigenvalue of a symmetric graph.
pub fn fiedler_value(g: &WeightedDigraph) -> Result<f64> {
    if g.n_vertices() < 2 {
        return Err(Error::InvalidSize(
            "the Fiedler value needs at least two vertices".into(),
        ));
    }
    let spectrum = symmetric_spectrum(&laplacian(g))?;
    Ok(spectrum[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub holds: bool,
    /// First index `k` with `lambda_k(P) > lambda_k(Q) + 1e-9`.
    pub offending_index: Option<usize>,
    pub spectrum_p: Vec<f64>,
    pub spectrum_q: Vec<f64>,
}

/// Checks the ordering `lambda_k(L_P) <= lambda_k(L_Q)` of ascending Laplacian
/// spectra for symmetric `0 <= p <= q` (elementwise).
pub fn eigenvalue_comparison_check(
    p: &WeightedDigraph,
    q: &WeightedDigraph,
) -> Result<ComparisonOutcome> {
    let n = p.n_vertices();
    if q.n_vertices() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.n_vertices(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            let (pij, qij) = (p.weight(i, j), q.weight(i, j));
            if !(0.0 <= pij && pij <= qij) {
                return Err(Error::PreconditionViolated(format!(
                    "need 0 <= p_ij <= q_ij, got p[{i}][{j}] = {pij}, q[{i}][{j}] = {qij}"
                )));
            }
        }
    }
    let spectrum_p = symmetric_spectrum(&laplacian(p))?;
    let spectrum_q = symmetric_spectrum(&laplacian(q))?;
    let offending_index = spectrum_p
        .iter()
        .zip(&spectrum_q)
        .position(|(lp, lq)| *lp > *lq + 1e-9);
    Ok(ComparisonOutcome {
        holds: offending_index.is_none(),
        offending_index,
        spectrum_p,
        spectrum_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_spectrum(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-9);
        }
    }

    #[test]
    fn complete_graph_spectrum() {
        let n = 7;
        let spec =
            symmetric_spectrum(&laplacian(&WeightedDigraph::complete(n, 1.0).unwrap())).unwrap();
        let mut want = vec![n as f64; n];
        want[0] = 0.0;
        assert_spectrum(&spec, &want);
    }

    #[test]
    fn two_disjoint_edges() {
        let mut g = WeightedDigraph::empty(4).unwrap();
        g.set_undirected(0, 1, 1.0);
        g.set_undirected(2, 3, 1.0);
        let spec = symmetric_spectrum(&laplacian(&g)).unwrap();
        assert_spectrum(&spec, &[0.0, 0.0, 2.0, 2.0]);
        assert_eq!(zero_eigenvalue_multiplicity(&spec), 2);
    }

    #[test]
    fn star_graph_spectrum() {
        // Star K_{1,4}: characteristic polynomial lambda (lambda - 1)^3 (lambda - 5).
        let mut g = WeightedDigraph::empty(5).unwrap();
        for j in 1..5 {
            g.set_undirected(0, j, 1.0);
        }
        let spec = symmetric_spectrum(&laplacian(&g)).unwrap();
        assert_spectrum(&spec, &[0.0, 1.0, 1.0, 1.0, 5.0]);
    }

    #[test]
    fn fiedler_examples() {
        let alpha = 0.37;
        let k60 = WeightedDigraph::complete(60, alpha).unwrap();
        assert_abs_diff_eq!(fiedler_value(&k60).unwrap(), 60.0 * alpha, epsilon = 1e-9);

        let mut disconnected = WeightedDigraph::empty(4).unwrap();
        disconnected.set_undirected(0, 1, 2.0);
        disconnected.set_undirected(2, 3, 2.0);
        assert_abs_diff_eq!(fiedler_value(&disconnected).unwrap(), 0.0, epsilon = 1e-9);

        // Path P3: eigenvalues 0, 1, 3.
        let mut path = WeightedDigraph::empty(3).unwrap();
        path.set_undirected(0, 1, 1.0);
        path.set_undirected(1, 2, 1.0);
        assert_abs_diff_eq!(fiedler_value(&path).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let mut g = WeightedDigraph::empty(3).unwrap();
        g.set_weight(0, 1, 1.0);
        assert!(matches!(fiedler_value(&g), Err(Error::NonSymmetric(_))));
        assert!(matches!(
            symmetric_spectrum(&laplacian(&g)),
            Err(Error::NonSymmetric(_))
        ));
    }

    #[test]
    fn comparison_examples() {
        let q = WeightedDigraph::complete(4, 1.0).unwrap();
        let p = q.scaled(0.5);
        let out = eigenvalue_comparison_check(&p, &q).unwrap();
        assert!(out.holds);
        for (lp, lq) in out.spectrum_p.iter().zip(&out.spectrum_q) {
            assert_abs_diff_eq!(*lp, 0.5 * lq, epsilon = 1e-9);
        }

        let same = eigenvalue_comparison_check(&q, &q).unwrap();
        assert!(same.holds);
        assert_eq!(same.spectrum_p, same.spectrum_q);

        let err = eigenvalue_comparison_check(&q, &p).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }
}
