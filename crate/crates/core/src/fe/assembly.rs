use crate::fe::Matrix;
use crate::solvers::SparseMatrix;
use crate::Error;

/// Local-to-global degree-of-freedom numbering and the constrained-dof mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub element_dofs: Vec<Vec<usize>>,
    pub ndof: usize,
    pub fixed: Vec<bool>,
}

impl DofMap {
    pub fn new(element_dofs: Vec<Vec<usize>>, ndof: usize) -> Self {
        DofMap { element_dofs, ndof, fixed: vec![false; ndof] }
    }

    /// Indices of unconstrained dofs in ascending order.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.ndof).filter(|&i| !self.fixed[i]).collect()
    }
}

/// Sum local matrices into a global sparse matrix through a triplet list.
pub fn assemble_matrix(dofs: &DofMap, locals: &[Matrix]) -> Result<SparseMatrix, Error> {
    assert_eq!(dofs.element_dofs.len(), locals.len(), "one local matrix per element");
    let mut triplets = Vec::with_capacity(locals.iter().map(|m| m.rows() * m.cols()).sum());
    for (ld, a) in dofs.element_dofs.iter().zip(locals) {
        assert_eq!(ld.len(), a.rows());
        for (i, &gi) in ld.iter().enumerate() {
            if gi >= dofs.ndof {
                return Err(Error::IndexOutOfRange(gi));
            }
            for (j, &gj) in ld.iter().enumerate() {
                let v = a[(i, j)];
                if v != 0.0 {
                    triplets.push((gi, gj, v));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(dofs.ndof, dofs.ndof, triplets))
}

/// Sum local vectors into a global vector.
pub fn assemble_vector(dofs: &DofMap, locals: &[Vec<f64>]) -> Result<Vec<f64>, Error> {
    let mut out = vec![0.0; dofs.ndof];
    for (ld, b) in dofs.element_dofs.iter().zip(locals) {
        for (&g, v) in ld.iter().zip(b) {
            *out.get_mut(g).ok_or(Error::IndexOutOfRange(g))? += v;
        }
    }
    Ok(out)
}
