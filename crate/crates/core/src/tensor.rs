//! Even-order quaternion tensors and the Einstein product.
//!
//! A [`QTensor`] in `H^{I₁×…×I_N×J₁×…×J_M}` stores its entries in row-major
//! order over the concatenated multi-index `(i₁…i_N, j₁…j_M)`. Matricization
//! flattens the row modes to one index and the column modes to another, both
//! row-major, so the canonical storage order coincides with the row-major
//! layout of the matricized matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::quaternion::Quaternion;

/// Row and column mode lists of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    pub row_modes: Vec<usize>,
    pub col_modes: Vec<usize>,
}

impl TensorShape {
    pub fn new(row_modes: Vec<usize>, col_modes: Vec<usize>) -> Result<Self> {
        let shape = TensorShape { row_modes, col_modes };
        shape.validate()?;
        Ok(shape)
    }

    /// Square shape `(modes; modes)`.
    pub fn square(modes: &[usize]) -> Result<Self> {
        TensorShape::new(modes.to_vec(), modes.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        for (side, modes) in [("row", &self.row_modes), ("col", &self.col_modes)] {
            if modes.is_empty() {
                return Err(Error::InvalidArgument(format!("{side} mode list is empty")));
            }
            if modes.contains(&0) {
                return Err(Error::InvalidArgument(format!("{side} modes {modes:?} contain a zero extent")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.row_modes.iter().product()
    }

    pub fn cols(&self) -> usize {
        self.col_modes.iter().product()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn order(&self) -> usize {
        self.row_modes.len() + self.col_modes.len()
    }

    /// Shape with row and column modes exchanged.
    pub fn swapped(&self) -> TensorShape {
        TensorShape { row_modes: self.col_modes.clone(), col_modes: self.row_modes.clone() }
    }
}

impl std::fmt::Display for TensorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}x{:?}", self.row_modes, self.col_modes)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorRepr {
    row_modes: Vec<usize>,
    col_modes: Vec<usize>,
    data: Vec<Quaternion>,
}

/// Dense quaternion tensor with designated row and column modes.
///
/// Serialized as `{"row_modes": [...], "col_modes": [...], "data": [[w,x,y,z], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct QTensor {
    shape: TensorShape,
    data: Vec<Quaternion>,
}

impl TryFrom<TensorRepr> for QTensor {
    type Error = Error;
    fn try_from(r: TensorRepr) -> Result<Self> {
        QTensor::from_vec(TensorShape::new(r.row_modes, r.col_modes)?, r.data)
    }
}

impl From<QTensor> for TensorRepr {
    fn from(t: QTensor) -> Self {
        TensorRepr { row_modes: t.shape.row_modes, col_modes: t.shape.col_modes, data: t.data }
    }
}

impl QTensor {
    pub fn from_vec(shape: TensorShape, data: Vec<Quaternion>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor of shape {shape} needs {} entries, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(QTensor { shape, data })
    }

    pub fn zeros(shape: TensorShape) -> Self {
        let n = shape.len();
        QTensor { shape, data: vec![Quaternion::ZERO; n] }
    }

    /// Tensor whose entry at multi-index `(i…, j…)` is `f(i…, j…)`.
    pub fn from_fn(shape: TensorShape, mut f: impl FnMut(&[usize], &[usize]) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(shape.len());
        let mut ri = vec![0; shape.row_modes.len()];
        for _ in 0..shape.rows() {
            let mut ci = vec![0; shape.col_modes.len()];
            for _ in 0..shape.cols() {
                data.push(f(&ri, &ci));
                increment(&mut ci, &shape.col_modes);
            }
            increment(&mut ri, &shape.row_modes);
        }
        QTensor { shape, data }
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn row_modes(&self) -> &[usize] {
        &self.shape.row_modes
    }

    pub fn col_modes(&self) -> &[usize] {
        &self.shape.col_modes
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    /// Entry at the multi-index `(rows…, cols…)`.
    pub fn get(&self, rows: &[usize], cols: &[usize]) -> Quaternion {
        let r = linear_index(rows, &self.shape.row_modes);
        let c = linear_index(cols, &self.shape.col_modes);
        self.data[r * self.shape.cols() + c]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &QTensor) -> f64 {
        self.matricize().max_abs_diff(&other.matricize())
    }

    pub fn add(&self, other: &QTensor) -> Result<QTensor> {
        self.same_shape(other, "add")?;
        dematricize(&self.matricize().add(&other.matricize())?, &self.shape)
    }

    pub fn sub(&self, other: &QTensor) -> Result<QTensor> {
        self.same_shape(other, "subtract")?;
        dematricize(&self.matricize().sub(&other.matricize())?, &self.shape)
    }

    pub fn scale(&self, s: f64) -> QTensor {
        QTensor { shape: self.shape.clone(), data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    fn same_shape(&self, other: &QTensor, what: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!("cannot {what} tensors of shapes {} and {}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn matricize(&self) -> QMatrix {
        QMatrix::from_vec(self.shape.rows(), self.shape.cols(), self.data.clone())
            .expect("tensor data length matches its shape")
    }

    /// Plain transpose: entry `(j…, i…)` equals `a[i…, j…]`.
    pub fn transpose(&self) -> QTensor {
        let m = self.matricize().transpose();
        dematricize(&m, &self.shape.swapped()).expect("transpose preserves entry count")
    }
}

fn increment(idx: &mut [usize], modes: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < modes[k] {
            return;
        }
        idx[k] = 0;
    }
}

fn linear_index(idx: &[usize], modes: &[usize]) -> usize {
    assert_eq!(idx.len(), modes.len(), "multi-index has wrong arity");
    idx.iter().zip(modes).fold(0, |acc, (&i, &m)| {
        assert!(i < m, "index {i} out of range for mode of size {m}");
        acc * m + i
    })
}

/// Einstein product `A ⋆ B`, contracting A's column modes against B's row modes.
pub fn einstein_product(a: &QTensor, b: &QTensor) -> Result<QTensor> {
    if a.shape.col_modes != b.shape.row_modes {
        return Err(Error::ShapeMismatch(format!(
            "Einstein product needs A's column modes {:?} to equal B's row modes {:?}",
            a.shape.col_modes, b.shape.row_modes
        )));
    }
    let m = a.matricize().matmul(&b.matricize())?;
    let shape = TensorShape { row_modes: a.shape.row_modes.clone(), col_modes: b.shape.col_modes.clone() };
    Ok(QTensor { shape, data: m.into_data() })
}

/// `A*`: mode lists swap and `(A*)[j…, i…] = conj(a[i…, j…])`.
pub fn tensor_conj_transpose(a: &QTensor) -> QTensor {
    let m = a.matricize().conj_transpose();
    QTensor { shape: a.shape.swapped(), data: m.into_data() }
}

/// Unit tensor over `(modes; modes)`.
pub fn identity_tensor(modes: &[usize]) -> Result<QTensor> {
    let shape = TensorShape::square(modes)?;
    let n = shape.rows();
    Ok(QTensor { shape, data: QMatrix::identity(n).into_data() })
}

/// Diagonal tensor over `(modes; modes)` with the given diagonal in canonical order.
pub fn diagonal_tensor(modes: &[usize], diag: &[Quaternion]) -> Result<QTensor> {
    let shape = TensorShape::square(modes)?;
    if diag.len() != shape.rows() {
        return Err(Error::ShapeMismatch(format!(
            "diagonal over modes {modes:?} needs {} entries, got {}",
            shape.rows(),
            diag.len()
        )));
    }
    Ok(QTensor { shape, data: QMatrix::diagonal(diag).into_data() })
}

/// `tr(A) = Σ a[i…, i…]`.
pub fn tensor_trace(a: &QTensor) -> Result<Quaternion> {
    if a.shape.row_modes != a.shape.col_modes {
        return Err(Error::ShapeMismatch(format!("trace needs equal row and column modes, got {}", a.shape)));
    }
    a.matricize().trace()
}

pub fn matricize(a: &QTensor) -> QMatrix {
    a.matricize()
}

/// Inverse of [`matricize`] for a declared shape.
pub fn dematricize(m: &QMatrix, shape: &TensorShape) -> Result<QTensor> {
    shape.validate()?;
    if m.rows() != shape.rows() || m.cols() != shape.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix cannot be reshaped to {shape} ({}x{})",
            m.rows(),
            m.cols(),
            shape.rows(),
            shape.cols()
        )));
    }
    Ok(QTensor { shape: shape.clone(), data: m.data().to_vec() })
}

/// `[A; B]`: stacks flattened rows; the result has a single row mode of size `r_a + r_b`.
pub fn block_row(a: &QTensor, b: &QTensor) -> Result<QTensor> {
    if a.shape.col_modes != b.shape.col_modes {
        return Err(Error::ShapeMismatch(format!(
            "block_row needs shared column modes, got {:?} and {:?}",
            a.shape.col_modes, b.shape.col_modes
        )));
    }
    let m = a.matricize().vstack(&b.matricize())?;
    let shape = TensorShape { row_modes: vec![m.rows()], col_modes: a.shape.col_modes.clone() };
    dematricize(&m, &shape)
}

/// `[A B]`: concatenates flattened columns; the result has a single column mode of size `c_a + c_b`.
pub fn block_col(a: &QTensor, b: &QTensor) -> Result<QTensor> {
    if a.shape.row_modes != b.shape.row_modes {
        return Err(Error::ShapeMismatch(format!(
            "block_col needs shared row modes, got {:?} and {:?}",
            a.shape.row_modes, b.shape.row_modes
        )));
    }
    let m = a.matricize().hstack(&b.matricize())?;
    let shape = TensorShape { row_modes: a.shape.row_modes.clone(), col_modes: vec![m.cols()] };
    dematricize(&m, &shape)
}

/// `[[A B], [C D]]` with synthetic concatenated modes on both sides.
pub fn block_2x2(a: &QTensor, b: &QTensor, c: &QTensor, d: &QTensor) -> Result<QTensor> {
    let top = a.matricize().hstack(&b.matricize())?;
    let bottom = c.matricize().hstack(&d.matricize())?;
    if a.shape.rows() != b.shape.rows() || c.shape.rows() != d.shape.rows() || a.shape.cols() != c.shape.cols() {
        return Err(Error::ShapeMismatch(format!(
            "2x2 block layout mismatch: {}, {}, {}, {}",
            a.shape, b.shape, c.shape, d.shape
        )));
    }
    let m = top.vstack(&bottom)?;
    let shape = TensorShape { row_modes: vec![m.rows()], col_modes: vec![m.cols()] };
    dematricize(&m, &shape)
}
