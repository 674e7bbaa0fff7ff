//! Subsystem bookkeeping on multi-qubit spaces.
//!
//! Qubit position 0 is the most significant bit of a basis index. A local
//! operator acting on positions `[p0, p1, ..]` reads its own index with `p0`
//! as the most significant bit, so the order of `positions` matters.

use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Identifier of a qubit inside a layered register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitLabel {
    pub layer: usize,
    pub index: usize,
}

impl QubitLabel {
    pub fn new(layer: usize, index: usize) -> Self {
        Self { layer, index }
    }
}

/// Ordered set of qubit labels; the first label is the most significant qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    labels: Vec<QubitLabel>,
}

impl QubitLayout {
    pub fn new(labels: Vec<QubitLabel>) -> Result<Self> {
        let mut sorted = labels.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubsystem("duplicate qubit label".into()));
        }
        Ok(Self { labels })
    }

    /// Layout of consecutive layers with the given widths.
    pub fn for_widths(widths: &[usize]) -> Self {
        let labels = widths
            .iter()
            .enumerate()
            .flat_map(|(layer, &w)| (0..w).map(move |index| QubitLabel { layer, index }))
            .collect();
        Self { labels }
    }

    /// Plain register of `n` qubits, all in layer 0.
    pub fn register(n: usize) -> Self {
        Self::for_widths(&[n])
    }

    pub fn total_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn position(&self, label: QubitLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::InvalidSubsystem(format!("{label:?} not in layout")))
    }

    pub fn positions(&self, labels: &[QubitLabel]) -> Result<Vec<usize>> {
        labels.iter().map(|&l| self.position(l)).collect()
    }

    /// Positions of every qubit belonging to `layer`, in layout order.
    pub fn layer_positions(&self, layer: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.layer == layer)
            .map(|(p, _)| p)
            .collect()
    }
}

/// Precomputed index tables splitting a basis index into the bits at
/// `positions` and the remaining bits.
#[derive(Clone, Debug)]
pub struct SubsystemIndex {
    /// Offset contributed by each local basis state, indexed in `positions` order.
    pub local: Vec<usize>,
    /// Every global index whose bits at `positions` are all zero, ascending.
    pub rest: Vec<usize>,
}

impl SubsystemIndex {
    pub fn new(n_qubits: usize, positions: &[usize]) -> Result<Self> {
        check_positions(n_qubits, positions)?;
        let k = positions.len();
        let bit = |p: usize| 1usize << (n_qubits - 1 - p);
        let local = (0..1usize << k)
            .map(|a| {
                positions
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| a >> (k - 1 - i) & 1 == 1)
                    .map(|(_, &p)| bit(p))
                    .sum()
            })
            .collect();
        let mask: usize = positions.iter().map(|&p| bit(p)).sum();
        let rest = (0..1usize << n_qubits).filter(|i| i & mask == 0).collect();
        Ok(Self { local, rest })
    }
}

fn check_positions(n_qubits: usize, positions: &[usize]) -> Result<()> {
    let mut seen = 0usize;
    for &p in positions {
        if p >= n_qubits {
            return Err(Error::InvalidSubsystem(format!(
                "qubit position {p} outside a {n_qubits}-qubit space"
            )));
        }
        if seen >> p & 1 == 1 {
            return Err(Error::InvalidSubsystem(format!("qubit position {p} repeated")));
        }
        seen |= 1 << p;
    }
    Ok(())
}

fn check_square_qubits<T: Real>(m: &ComplexMatrix<T>, n_qubits: usize) -> Result<()> {
    if m.qubits() != Some(n_qubits) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            1usize << n_qubits,
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Applies `op` on the given qubit positions from the left: x ← (op ⊗ I) x.
///
/// `x` is a row-major block with `cols` columns and 2^n rows; a state vector
/// is the `cols = 1` case.
pub fn apply_left_raw<T: Real>(op: &ComplexMatrix<T>, index: &SubsystemIndex, cols: usize, x: &mut [C<T>]) {
    let k = index.local.len();
    debug_assert_eq!(op.rows(), k);
    let mut scratch = vec![C::<T>::zero(); k * cols];
    for &base in &index.rest {
        for (a, &off) in index.local.iter().enumerate() {
            let src = (base + off) * cols;
            scratch[a * cols..(a + 1) * cols].copy_from_slice(&x[src..src + cols]);
        }
        for (a, &off) in index.local.iter().enumerate() {
            let dst = &mut x[(base + off) * cols..(base + off + 1) * cols];
            dst.iter_mut().for_each(|z| *z = C::zero());
            for (b, u) in op.row(a).iter().enumerate() {
                if u.is_zero() {
                    continue;
                }
                for (d, s) in dst.iter_mut().zip(&scratch[b * cols..(b + 1) * cols]) {
                    *d += *u * *s;
                }
            }
        }
    }
}

/// Right-multiplies by the adjoint of `op` on the given positions:
/// x ← x (op ⊗ I)†.
pub fn apply_right_dagger_raw<T: Real>(
    op: &ComplexMatrix<T>,
    index: &SubsystemIndex,
    rows: usize,
    cols: usize,
    x: &mut [C<T>],
) {
    let k = index.local.len();
    let op_conj: Vec<C<T>> = op.as_slice().iter().map(|z| z.conj()).collect();
    let mut v = vec![C::<T>::zero(); k];
    for r in 0..rows {
        let row = &mut x[r * cols..(r + 1) * cols];
        for &base in &index.rest {
            for (b, &off) in index.local.iter().enumerate() {
                v[b] = row[base + off];
            }
            for (a, &off) in index.local.iter().enumerate() {
                let coeffs = &op_conj[a * k..(a + 1) * k];
                row[base + off] = coeffs.iter().zip(&v).map(|(u, s)| *u * *s).sum();
            }
        }
    }
}

/// x ← (op ⊗ I) x (op ⊗ I)† for a square 2^n matrix `x`.
pub fn conjugate_in_place<T: Real>(op: &ComplexMatrix<T>, index: &SubsystemIndex, x: &mut ComplexMatrix<T>) {
    let d = x.rows();
    apply_left_raw(op, index, d, x.as_mut_slice());
    apply_right_dagger_raw(op, index, d, d, x.as_mut_slice());
}

/// x ← (op ⊗ I)† x (op ⊗ I), the Heisenberg-picture conjugation.
pub fn conjugate_dagger_in_place<T: Real>(op: &ComplexMatrix<T>, index: &SubsystemIndex, x: &mut ComplexMatrix<T>) {
    conjugate_in_place(&op.dagger(), index, x);
}

/// Full-space operator acting as `op` on `positions` and as identity elsewhere.
pub fn embed_positions<T: Real>(op: &ComplexMatrix<T>, positions: &[usize], n_qubits: usize) -> Result<ComplexMatrix<T>> {
    if op.qubits() != Some(positions.len()) {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {}x{} cannot act on {} qubits",
            op.rows(),
            op.cols(),
            positions.len()
        )));
    }
    let index = SubsystemIndex::new(n_qubits, positions)?;
    let mut out = ComplexMatrix::identity(1 << n_qubits);
    let d = out.rows();
    apply_left_raw(op, &index, d, out.as_mut_slice());
    Ok(out)
}

/// [`embed_positions`] addressed by layout labels.
pub fn embed<T: Real>(op: &ComplexMatrix<T>, labels: &[QubitLabel], layout: &QubitLayout) -> Result<ComplexMatrix<T>> {
    let positions = layout.positions(labels)?;
    embed_positions(op, &positions, layout.total_qubits())
}

fn sorted_keep(n_qubits: usize, keep: &[usize]) -> Result<Vec<usize>> {
    check_positions(n_qubits, keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    Ok(keep)
}

fn complement(n_qubits: usize, keep: &[usize]) -> Vec<usize> {
    (0..n_qubits).filter(|p| !keep.contains(p)).collect()
}

/// Reduced matrix on the kept positions. Kept qubits retain their relative
/// order regardless of the order of `keep`.
pub fn partial_trace_positions<T: Real>(m: &ComplexMatrix<T>, n_qubits: usize, keep: &[usize]) -> Result<ComplexMatrix<T>> {
    check_square_qubits(m, n_qubits)?;
    let keep = sorted_keep(n_qubits, keep)?;
    let traced = complement(n_qubits, &keep);
    let kept_index = SubsystemIndex::new(n_qubits, &keep)?;
    let traced_offsets = SubsystemIndex::new(n_qubits, &traced)?.local;
    let k = kept_index.local.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for (i, &ki) in kept_index.local.iter().enumerate() {
        for (j, &kj) in kept_index.local.iter().enumerate() {
            out[(i, j)] = traced_offsets.iter().map(|&r| m[(ki + r, kj + r)]).sum();
        }
    }
    Ok(out)
}

/// [`partial_trace_positions`] addressed by layout labels.
pub fn partial_trace<T: Real>(m: &ComplexMatrix<T>, layout: &QubitLayout, keep: &[QubitLabel]) -> Result<ComplexMatrix<T>> {
    let positions = layout.positions(keep)?;
    partial_trace_positions(m, layout.total_qubits(), &positions)
}

/// tr_rest(x·y) onto the kept positions, without forming the product.
pub fn partial_trace_of_product<T: Real>(
    x: &ComplexMatrix<T>,
    y: &ComplexMatrix<T>,
    n_qubits: usize,
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    check_square_qubits(x, n_qubits)?;
    check_square_qubits(y, n_qubits)?;
    let keep = sorted_keep(n_qubits, keep)?;
    let traced = complement(n_qubits, &keep);
    let kept = SubsystemIndex::new(n_qubits, &keep)?.local;
    let traced = SubsystemIndex::new(n_qubits, &traced)?.local;
    let yt = y.transpose();
    let k = kept.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for (i, &ki) in kept.iter().enumerate() {
        for (j, &kj) in kept.iter().enumerate() {
            let mut acc = C::zero();
            for &r in &traced {
                let xr = x.row(ki + r);
                let yc = yt.row(kj + r);
                for (a, b) in xr.iter().zip(yc) {
                    acc += *a * *b;
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Permutation matrix exchanging qubits at positions `a` and `b`.
pub fn swap_positions<T: Real>(a: usize, b: usize, n_qubits: usize) -> ComplexMatrix<T> {
    let d = 1usize << n_qubits;
    let ba = 1usize << (n_qubits - 1 - a);
    let bb = 1usize << (n_qubits - 1 - b);
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let (xa, xb) = (i & ba != 0, i & bb != 0);
        let mut j = i & !(ba | bb);
        if xa {
            j |= bb;
        }
        if xb {
            j |= ba;
        }
        out[(j, i)] = num_traits::One::one();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_random_state, haar_random_unitary, SeededRng};
    use crate::linalg::PureState;
    use crate::scalar::cr;

    type M = ComplexMatrix<f64>;

    fn random_density(n_qubits: usize, rng: &mut SeededRng) -> M {
        // mixture of three random pure states
        let d = 1 << n_qubits;
        let mut rho = M::zeros(d, d);
        for w in [0.5, 0.3, 0.2] {
            let s: PureState<f64> = haar_random_state(d, rng);
            rho.add_assign_scaled(&s.projector(), cr(w));
        }
        rho
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let mut rng = SeededRng::new(1);
        let a = random_density(1, &mut rng);
        let b = random_density(2, &mut rng);
        let ab = a.kron(&b);
        let reduced = partial_trace_positions(&ab, 3, &[0]).unwrap();
        assert!(reduced.max_abs_diff(&a) < 1e-12);
        let other = partial_trace_positions(&ab, 3, &[1, 2]).unwrap();
        assert!(other.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let phi = [cr(s), cr(0.0), cr(0.0), cr(s)];
        let rho = M::outer(&phi, &phi);
        let reduced = partial_trace_positions(&rho, 2, &[1]).unwrap();
        assert!(reduced.max_abs_diff(&M::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn three_qubit_trace_matches_summation_oracle() {
        let mut rng = SeededRng::new(7);
        let rho = random_density(3, &mut rng);
        let got = partial_trace_positions(&rho, 3, &[0, 2]).unwrap();
        // Σ_j ⟨a j c|ρ|a' j c'⟩ written out with explicit bit arithmetic
        for a in 0..2 {
            for cc in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut sum = cr(0.0);
                        for j in 0..2 {
                            sum += rho[(a * 4 + j * 2 + cc, a2 * 4 + j * 2 + c2)];
                        }
                        assert!((got[(a * 2 + cc, a2 * 2 + c2)] - sum).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn keep_order_is_irrelevant_and_duplicates_rejected() {
        let mut rng = SeededRng::new(3);
        let rho = random_density(3, &mut rng);
        let a = partial_trace_positions(&rho, 3, &[2, 0]).unwrap();
        let b = partial_trace_positions(&rho, 3, &[0, 2]).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            partial_trace_positions(&rho, 3, &[0, 0]),
            Err(Error::InvalidSubsystem(_))
        ));
        assert!(matches!(
            partial_trace_positions(&rho, 3, &[3]),
            Err(Error::InvalidSubsystem(_))
        ));
    }

    #[test]
    fn labels_outside_layout_are_rejected() {
        let layout = QubitLayout::for_widths(&[1, 1]);
        let rho = M::identity(4).scale_real(0.25);
        let err = partial_trace(&rho, &layout, &[QubitLabel::new(2, 0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidSubsystem(_)));
        assert!(QubitLayout::new(vec![QubitLabel::new(0, 0), QubitLabel::new(0, 0)]).is_err());
    }

    #[test]
    fn embed_pauli_x_on_first_qubit() {
        let x = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let got = embed_positions(&x, &[0], 2).unwrap();
        assert_eq!(got, x.kron(&M::identity(2)));
    }

    #[test]
    fn embed_identity_is_identity() {
        let got = embed_positions(&M::identity(4), &[2, 0], 3).unwrap();
        assert_eq!(got, M::identity(8));
    }

    #[test]
    fn embed_matches_permutation_oracle() {
        let mut rng = SeededRng::new(11);
        let u: M = haar_random_unitary(4, &mut rng);
        let got = embed_positions(&u, &[0, 2], 3).unwrap();
        let swap12 = swap_positions::<f64>(1, 2, 3);
        let oracle = swap12.matmul(&u.kron(&M::identity(2))).matmul(&swap12);
        assert!(got.max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn embed_rejects_out_of_range() {
        let x = M::identity(2);
        assert!(embed_positions(&x, &[4], 3).is_err());
        assert!(embed_positions(&M::identity(4), &[0], 3).is_err());
    }

    #[test]
    fn conjugation_kernel_matches_dense_embedding() {
        let mut rng = SeededRng::new(5);
        let u: M = haar_random_unitary(8, &mut rng);
        let rho = random_density(5, &mut rng);
        let positions = [4, 1, 2];
        let full = embed_positions(&u, &positions, 5).unwrap();
        let oracle = full.matmul(&rho).matmul(&full.dagger());
        let mut got = rho.clone();
        conjugate_in_place(&u, &SubsystemIndex::new(5, &positions).unwrap(), &mut got);
        assert!(got.max_abs_diff(&oracle) < 1e-13);
    }

    #[test]
    fn partial_trace_of_product_matches_explicit_product() {
        let mut rng = SeededRng::new(9);
        let x = random_density(4, &mut rng);
        let y: M = haar_random_unitary(16, &mut rng);
        let got = partial_trace_of_product(&x, &y, 4, &[1, 3]).unwrap();
        let oracle = partial_trace_positions(&x.matmul(&y), 4, &[1, 3]).unwrap();
        assert!(got.max_abs_diff(&oracle) < 1e-13);
    }

    #[test]
    fn swap_positions_exchanges_basis_bits() {
        let s = swap_positions::<f64>(0, 1, 2);
        // |01⟩ → |10⟩
        let v = s.apply(&[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert_eq!(v, vec![cr(0.0), cr(0.0), cr(1.0), cr(0.0)]);
        assert_eq!(s.matmul(&s), M::identity(4));
    }
}
