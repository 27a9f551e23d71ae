//! Row-chunked matrix products.
//!
//! Rows of the left operand are split into fixed-size chunks that are
//! multiplied independently (in parallel with the `parallel` feature). The
//! chunk size does not depend on the thread count, so results are bitwise
//! identical for any pool size.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::par;

const CHUNK_ROWS: usize = 64;
/// Below this many multiply-adds a single `dot` call is used.
const PARALLEL_WORK: usize = 1 << 18;

/// `a · b`.
pub fn matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let (m, k) = a.dim();
    let n = b.ncols();
    assert_eq!(k, b.nrows(), "matmul: inner dimensions differ");
    if m * k * n < PARALLEL_WORK || m <= CHUNK_ROWS {
        return a.dot(&b);
    }
    let mut out = Array2::<f64>::zeros((m, n));
    if n == 0 {
        return out;
    }
    let slice = out.as_slice_mut().expect("fresh array is contiguous");
    par::for_each_chunk_mut(slice, CHUNK_ROWS * n, |ci, chunk| {
        let r0 = ci * CHUNK_ROWS;
        let rows = chunk.len() / n;
        let block = a.slice(s![r0..r0 + rows, ..]).dot(&b);
        for (dst, src) in chunk.iter_mut().zip(block.iter()) {
            *dst = *src;
        }
    });
    out
}

/// Column sums, used for bias gradients.
pub fn col_sums(a: &Array2<f64>) -> ndarray::Array1<f64> {
    a.sum_axis(Axis(0))
}
