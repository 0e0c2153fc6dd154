//! Case/control contingency tables over genotype categories.
//!
//! A single marker has categories 0..3 (its genotype code); a pair has
//! categories 0..9 with id `3·g1 + g2`. Subjects missing any marker of the
//! test are excluded from that test only. Categories empty in both groups are
//! dropped, so `k` counts the non-empty categories.
//!
//! This module is the naive reference path. [`crate::packed`] builds the same
//! tables from bitplanes and must agree exactly.

use crate::dataset::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};

/// Largest category count of any supported test (a marker pair).
pub const MAX_CATEGORIES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Cell {
    pub category: u8,
    /// Cases in this category.
    pub n1: u32,
    /// Controls in this category.
    pub n0: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyTable {
    cells: [Cell; MAX_CATEGORIES],
    len: u8,
    n1: u32,
    n0: u32,
}

impl ContingencyTable {
    /// Builds a table from per-category case and control counts, indexed by
    /// category id. Fails with [`Error::Degenerate`] when every count is zero.
    pub fn from_counts(cases: &[u32], controls: &[u32]) -> Result<Self> {
        assert_eq!(cases.len(), controls.len());
        assert!(cases.len() <= MAX_CATEGORIES);
        let mut table = Self { cells: [Cell::default(); MAX_CATEGORIES], len: 0, n1: 0, n0: 0 };
        for (category, (&n1, &n0)) in cases.iter().zip(controls).enumerate() {
            if n1 + n0 == 0 {
                continue;
            }
            table.cells[table.len as usize] = Cell { category: category as u8, n1, n0 };
            table.len += 1;
            table.n1 += n1;
            table.n0 += n0;
        }
        if table.len == 0 {
            return Err(Error::Degenerate);
        }
        Ok(table)
    }

    /// Non-empty cells in ascending category order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells[..self.len as usize]
    }

    pub fn k(&self) -> usize {
        self.len as usize
    }

    /// Cases counted after missing-data exclusion.
    pub fn n1(&self) -> u32 {
        self.n1
    }

    /// Controls counted after missing-data exclusion.
    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn cell(&self, category: u8) -> Option<&Cell> {
        self.cells().iter().find(|c| c.category == category)
    }
}

pub fn tabulate_single(dataset: &GenotypeDataset, marker: usize) -> Result<ContingencyTable> {
    dataset.check_marker(marker)?;
    tabulate_single_with(dataset.column(marker), dataset.phenotype())
}

/// Naive single-marker tabulation against an arbitrary phenotype vector.
pub fn tabulate_single_with(column: &[u8], phenotype: &[u8]) -> Result<ContingencyTable> {
    debug_assert_eq!(column.len(), phenotype.len());
    let mut counts = [[0u32; 3]; 2];
    for (&g, &y) in column.iter().zip(phenotype) {
        if g != MISSING {
            counts[y as usize][g as usize] += 1;
        }
    }
    ContingencyTable::from_counts(&counts[1], &counts[0])
}

pub fn tabulate_pair(dataset: &GenotypeDataset, m1: usize, m2: usize) -> Result<ContingencyTable> {
    dataset.check_marker(m1)?;
    dataset.check_marker(m2)?;
    if m1 == m2 {
        return Err(Error::SameMarker(m1));
    }
    tabulate_pair_with(dataset.column(m1), dataset.column(m2), dataset.phenotype())
}

/// Naive pair tabulation; category id is `3·g1 + g2`.
pub fn tabulate_pair_with(first: &[u8], second: &[u8], phenotype: &[u8]) -> Result<ContingencyTable> {
    debug_assert_eq!(first.len(), phenotype.len());
    debug_assert_eq!(second.len(), phenotype.len());
    let mut counts = [[0u32; MAX_CATEGORIES]; 2];
    for ((&g1, &g2), &y) in first.iter().zip(second).zip(phenotype) {
        if g1 != MISSING && g2 != MISSING {
            counts[y as usize][(3 * g1 + g2) as usize] += 1;
        }
    }
    ContingencyTable::from_counts(&counts[1], &counts[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::d0;
    use alloc::vec;
    use alloc::vec::Vec;

    fn cells(t: &ContingencyTable) -> Vec<(u8, u32, u32)> {
        t.cells().iter().map(|c| (c.category, c.n1, c.n0)).collect()
    }

    #[test]
    fn d0_marker_a() {
        let t = tabulate_single(&d0(), 0).unwrap();
        assert_eq!(cells(&t), vec![(0, 2, 1), (1, 1, 2), (2, 1, 1)]);
        assert_eq!((t.k(), t.n1(), t.n0()), (3, 4, 4));
    }

    #[test]
    fn d0_pair_ab() {
        // A = [0,0,1,2 | 0,1,1,2], B = [2,2,1,0 | 0,0,1,1]
        // cases: (0,2) x2, (1,1), (2,0); controls: (0,0), (1,0), (1,1), (2,1)
        let t = tabulate_pair(&d0(), 0, 1).unwrap();
        assert_eq!(
            cells(&t),
            vec![(0, 0, 1), (2, 2, 0), (3, 0, 1), (4, 1, 1), (6, 1, 0), (7, 0, 1)]
        );
        assert_eq!(t.k(), 6);
        assert_eq!(t.cell(2).map(|c| (c.n1, c.n0)), Some((2, 0)));
    }

    #[test]
    fn pair_symmetry_on_d0() {
        let d = d0();
        let ab = tabulate_pair(&d, 0, 1).unwrap();
        let ba = tabulate_pair(&d, 1, 0).unwrap();
        assert_eq!(ab.k(), ba.k());
        let mut x: Vec<_> = ab.cells().iter().map(|c| (c.n1, c.n0)).collect();
        let mut y: Vec<_> = ba.cells().iter().map(|c| (c.n1, c.n0)).collect();
        x.sort();
        y.sort();
        assert_eq!(x, y);
    }

    #[test]
    fn constant_markers() {
        let d = GenotypeDataset::new(
            vec!["x".into(), "y".into()],
            vec![vec![0; 4], vec![2; 4]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        assert_eq!(tabulate_single(&d, 0).unwrap().k(), 1);
        assert_eq!(tabulate_pair(&d, 0, 1).unwrap().k(), 1);
    }

    #[test]
    fn all_missing_is_degenerate() {
        let d = GenotypeDataset::new(
            vec!["x".into(), "y".into()],
            vec![vec![MISSING; 4], vec![0, 1, 2, 0]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        assert_eq!(tabulate_single(&d, 0), Err(Error::Degenerate));
        assert_eq!(tabulate_pair(&d, 0, 1), Err(Error::Degenerate));
    }

    #[test]
    fn missing_excluded_per_test() {
        let d = GenotypeDataset::new(
            vec!["x".into(), "y".into()],
            vec![vec![0, MISSING, 1, 2], vec![1, 1, MISSING, 0]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        let x = tabulate_single(&d, 0).unwrap();
        assert_eq!(x.n1() + x.n0(), 3);
        let xy = tabulate_pair(&d, 0, 1).unwrap();
        assert_eq!(xy.n1() + xy.n0(), 2);
    }

    #[test]
    fn bad_indices() {
        let d = d0();
        assert!(matches!(tabulate_single(&d, 2), Err(Error::MarkerOutOfRange { .. })));
        assert_eq!(tabulate_pair(&d, 1, 1), Err(Error::SameMarker(1)));
    }
}
