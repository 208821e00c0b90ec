use super::medium::{Medium, Medium1D, Medium2D};
use crate::error::{Error, Result};
use crate::linalg::sparse::{banded_cholesky, BandedLower, SparseMatrix};
use crate::linalg::DenseMatrix;

/// Lower-bidiagonal `N × N` matrix: `diag[j]` at `(j, j)` and `sub[j]` at
/// `(j+1, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBidiagonal {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl LowerBidiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut d = DenseMatrix::zeros(n, n);
        for j in 0..n {
            d[(j, j)] = self.diag[j];
            if j + 1 < n {
                d[(j + 1, j)] = self.sub[j];
            }
        }
        d
    }

    /// `L Lᵀ` as a sparse tridiagonal matrix.
    pub fn gram(&self) -> SparseMatrix {
        let n = self.n();
        let mut t = Vec::with_capacity(3 * n);
        for j in 0..n {
            let below = if j > 0 { self.sub[j - 1] } else { 0.0 };
            t.push((j, j, self.diag[j] * self.diag[j] + below * below));
            if j + 1 < n {
                let off = self.diag[j] * self.sub[j];
                t.push((j, j + 1, off));
                t.push((j + 1, j, off));
            }
        }
        SparseMatrix::from_triplets(n, &t).expect("tridiagonal pattern is valid")
    }

    /// `Lᵀ L` as a sparse tridiagonal matrix.
    pub fn transpose_gram(&self) -> SparseMatrix {
        let n = self.n();
        let mut t = Vec::with_capacity(3 * n);
        for j in 0..n {
            let below = if j + 1 < n { self.sub[j] } else { 0.0 };
            t.push((j, j, self.diag[j] * self.diag[j] + below * below));
            if j + 1 < n {
                let off = self.sub[j] * self.diag[j + 1];
                t.push((j, j + 1, off));
                t.push((j + 1, j, off));
            }
        }
        SparseMatrix::from_triplets(n, &t).expect("tridiagonal pattern is valid")
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|j| self.diag[j] * x[j] + if j > 0 { self.sub[j - 1] * x[j - 1] } else { 0.0 }).collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|j| self.diag[j] * x[j] + if j + 1 < n { self.sub[j] * x[j + 1] } else { 0.0 }).collect()
    }
}

/// Two-point discretization of the 1D Schrödinger factor `−∂_T + ½q'`.
pub fn build_lq_1d(medium: &Medium1D) -> LowerBidiagonal {
    let n = medium.n();
    let inv = 1.0 / medium.dt();
    let sp = medium.sigma_primary();
    let sd = medium.sigma_dual();
    let diag = (0..n).map(|j| -inv * (sp[j] / sd[j]).sqrt()).collect();
    let sub = (1..n).map(|j| inv * (sp[j] / sd[j - 1]).sqrt()).collect();
    LowerBidiagonal { diag, sub }
}

/// Finite-volume stiffness `K` (face coefficients `c/σ`, harmonic means) and
/// the diagonal scaling `G = diag(√(σc/V))` such that the acoustic operator is
/// `A = G² K` and its symmetrized form is `S = G K G`.
fn assemble_2d(medium: &Medium2D) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let (nx, ny) = (medium.nx(), medium.ny());
    let kappa: Vec<f64> = medium.sigma().iter().zip(medium.c()).map(|(s, c)| c / s).collect();
    let harmonic = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let mut diag = vec![0.0; nx * ny];
    let mut off = Vec::new();
    for j in 0..ny {
        let row_len = if j == 0 { 0.5 } else { 1.0 };
        for i in 0..nx {
            let a = medium.index(i, j);
            // Horizontal faces; the first and last columns see a Dirichlet ghost.
            if i + 1 < nx {
                let b = medium.index(i + 1, j);
                let w = harmonic(kappa[a], kappa[b]) * row_len;
                diag[a] += w;
                diag[b] += w;
                off.push((a, b, -w));
            }
            if i == 0 {
                diag[a] += kappa[a] * row_len;
            }
            if i + 1 == nx {
                diag[a] += kappa[a] * row_len;
            }
            // Vertical faces; the last row sees a Dirichlet ghost.
            if j + 1 < ny {
                let b = medium.index(i, j + 1);
                let w = harmonic(kappa[a], kappa[b]);
                diag[a] += w;
                diag[b] += w;
                off.push((a, b, -w));
            } else {
                diag[a] += kappa[a];
            }
        }
    }
    let g: Vec<f64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            let a = medium.index(i, j);
            (medium.sigma()[a] * medium.c()[a] / medium.cell_volume(i, j)).sqrt()
        })
        .collect();
    let mut t = Vec::with_capacity(nx * ny + 2 * off.len());
    for (a, &d) in diag.iter().enumerate() {
        t.push((a, a, d));
    }
    for (a, b, w) in off {
        t.push((a, b, w));
        t.push((b, a, w));
    }
    (t, g)
}

/// Unsymmetrized acoustic operator `A = −σc∇·(c/σ ∇)` on the 2D grid.
pub fn acoustic_operator_2d(medium: &Medium2D) -> SparseMatrix {
    let (t, g) = assemble_2d(medium);
    let scaled: Vec<_> = t.into_iter().map(|(a, b, v)| (a, b, g[a] * g[a] * v)).collect();
    SparseMatrix::from_triplets(medium.nx() * medium.ny(), &scaled).expect("valid stencil")
}

/// Symmetrized 2D operator `S = G K G` (the continuum `c^{1/2} L_q L_qᵀ c^{-1/2}`).
pub fn symmetric_operator_2d(medium: &Medium2D) -> SparseMatrix {
    let (t, g) = assemble_2d(medium);
    let scaled: Vec<_> = t.into_iter().map(|(a, b, v)| (a, b, g[a] * g[b] * v)).collect();
    SparseMatrix::from_triplets(medium.nx() * medium.ny(), &scaled).expect("valid stencil")
}

/// Diagonal similarity `G = diag(√(σc/V))` with `A = G S G⁻¹`.
pub fn similarity_2d(medium: &Medium2D) -> Vec<f64> {
    assemble_2d(medium).1
}

/// Banded Cholesky factor `L_q` of the symmetrized 2D operator.
pub fn build_lq_2d(medium: &Medium2D) -> Result<BandedLower> {
    banded_cholesky(&symmetric_operator_2d(medium))
}

/// Fine-grid model: symmetrized operator `S`, scaled sensor deltas, and the
/// data needed for time-step stability checks.
#[derive(Clone, Debug)]
pub struct FineModel {
    operator: SparseMatrix,
    deltas: DenseMatrix,
    sensor_nodes: Vec<usize>,
    spacing: f64,
    max_speed: f64,
    dimension: usize,
}

impl FineModel {
    pub fn new(medium: &Medium) -> Result<Self> {
        match medium {
            Medium::OneD(m) => Ok(Self::from_1d(m)),
            Medium::TwoD(m) => Self::from_2d(m),
        }
    }

    pub fn from_1d(medium: &Medium1D) -> Self {
        let lq = build_lq_1d(medium);
        let n = medium.n();
        let mut deltas = DenseMatrix::zeros(n, 1);
        deltas[(0, 0)] = 1.0 / medium.dt().sqrt();
        Self { operator: lq.gram(), deltas, sensor_nodes: vec![0], spacing: medium.dt(), max_speed: 1.0, dimension: 1 }
    }

    pub fn from_2d(medium: &Medium2D) -> Result<Self> {
        let operator = symmetric_operator_2d(medium);
        let n = operator.n();
        let m = medium.sensors().len();
        let mut deltas = DenseMatrix::zeros(n, m);
        for (s, &i) in medium.sensors().iter().enumerate() {
            deltas[(medium.index(i, 0), s)] = 1.0 / medium.cell_volume(i, 0).sqrt();
        }
        let max_speed = medium.c().iter().fold(0.0f64, |a, &b| a.max(b));
        Ok(Self {
            operator,
            deltas,
            sensor_nodes: medium.sensors().iter().map(|&i| medium.index(i, 0)).collect(),
            spacing: medium.h(),
            max_speed,
            dimension: 2,
        })
    }

    /// Model from an explicit symmetric operator and delta columns.
    pub fn from_operator(operator: SparseMatrix, deltas: DenseMatrix) -> Result<Self> {
        if deltas.rows() != operator.n() {
            return Err(Error::ShapeMismatch(format!(
                "operator has {} rows, deltas have {}",
                operator.n(),
                deltas.rows()
            )));
        }
        let (_, hi) = operator.gershgorin_bounds();
        let sensor_nodes =
            (0..deltas.cols()).map(|s| deltas.column(s).iter().position(|&v| v != 0.0).unwrap_or(0)).collect();
        Ok(Self {
            operator,
            deltas,
            sensor_nodes,
            spacing: 2.0 / hi.max(f64::MIN_POSITIVE).sqrt(),
            max_speed: 1.0,
            dimension: 1,
        })
    }

    pub fn n(&self) -> usize {
        self.operator.n()
    }

    pub fn m(&self) -> usize {
        self.deltas.cols()
    }

    pub fn operator(&self) -> &SparseMatrix {
        &self.operator
    }

    pub fn deltas(&self) -> &DenseMatrix {
        &self.deltas
    }

    pub fn sensor_nodes(&self) -> &[usize] {
        &self.sensor_nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Upper bound on the spectrum of `S` (Gershgorin).
    pub fn spectrum_bound(&self) -> f64 {
        self.operator.gershgorin_bounds().1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_1d_factor() {
        let m = Medium1D::homogeneous(4, 2.0).unwrap();
        let l = build_lq_1d(&m).to_dense();
        let want = DenseMatrix::from_rows(&[
            &[-2.0, 0.0, 0.0, 0.0],
            &[2.0, -2.0, 0.0, 0.0],
            &[0.0, 2.0, -2.0, 0.0],
            &[0.0, 0.0, 2.0, -2.0],
        ]);
        assert_eq!(l, want);
    }

    #[test]
    fn single_node_factor() {
        let m = Medium1D::new(0.5, vec![4.0], vec![1.0]).unwrap();
        let l = build_lq_1d(&m);
        assert_eq!(l.to_dense(), DenseMatrix::from_diag(&[-4.0]));
    }

    #[test]
    fn bidiagonal_helpers_match_dense() {
        let m = Medium1D::from_profile(6, 3.0, |t| 1.0 + 0.3 * t).unwrap();
        let l = build_lq_1d(&m);
        let d = l.to_dense();
        assert!(l.gram().to_dense().sub(&d.matmul(&d.transpose())).max_abs() < 1e-12);
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let a = l.matvec(&x);
        let b = d.matvec(&x);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
        let a = l.matvec_transpose(&x);
        let b = d.transpose().matvec(&x);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
    }

    #[test]
    fn two_by_two_grid_is_ghost_node_laplacian() {
        let h = 0.5;
        let m = Medium2D::homogeneous(2, 2, h, 1.0, vec![0]).unwrap();
        // Ghost-node stencil: Neumann reflection on row 0, zero Dirichlet ghosts elsewhere.
        let s = 1.0 / (h * h);
        let want = DenseMatrix::from_rows(&[
            &[4.0 * s, -s, -2.0 * s, 0.0],
            &[-s, 4.0 * s, 0.0, -2.0 * s],
            &[-s, 0.0, 4.0 * s, -s],
            &[0.0, -s, -s, 4.0 * s],
        ]);
        let a = acoustic_operator_2d(&m).to_dense();
        assert!(a.sub(&want).max_abs() < 1e-12);
        let lq = build_lq_2d(&m).unwrap().to_dense();
        let sym = lq.matmul(&lq.transpose());
        assert!(sym.asymmetry() < 1e-12);
        let g = similarity_2d(&m);
        let back = DenseMatrix::from_fn(4, 4, |i, j| g[i] * sym[(i, j)] / g[j]);
        assert!(back.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn variable_fields_keep_similarity() {
        let m = Medium2D::from_fn(6, 5, 1.0, vec![1, 4], |x, z| (1.0 + 0.2 * (x * z).sin(), 1.0 + 0.1 * x)).unwrap();
        let s = symmetric_operator_2d(&m);
        assert!(s.asymmetry() < 1e-14);
        let a = acoustic_operator_2d(&m).to_dense();
        let g = similarity_2d(&m);
        let sd = s.to_dense();
        let back = DenseMatrix::from_fn(30, 30, |i, j| g[i] * sd[(i, j)] / g[j]);
        assert!(back.sub(&a).max_abs() < 1e-12 * a.max_abs());
        let l = build_lq_2d(&m).unwrap().to_dense();
        assert!(l.matmul(&l.transpose()).sub(&sd).max_abs() < 1e-12 * sd.max_abs());
    }

    #[test]
    fn fine_model_deltas() {
        let m = Medium2D::homogeneous(4, 3, 1.0, 1.0, vec![1, 3]).unwrap();
        let f = FineModel::from_2d(&m).unwrap();
        assert_eq!(f.m(), 2);
        assert_eq!(f.sensor_nodes(), &[1, 3]);
        assert!((f.deltas()[(3, 1)] - 2f64.sqrt()).abs() < 1e-15);
    }
}
