//! Validated genotype matrix plus binary phenotype.
//!
//! Genotypes are additive minor-allele counts {0, 1, 2} with [`MISSING`] for
//! absent calls. Storage is marker-major so that a test touching one or two
//! markers reads contiguous columns.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Code used for a missing genotype call.
pub const MISSING: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenotypeDataset {
    marker_names: Vec<String>,
    columns: Vec<Vec<u8>>,
    phenotype: Vec<u8>,
}

impl GenotypeDataset {
    /// Builds a dataset from marker-major columns.
    ///
    /// Every column must have one entry per subject, entries must be 0, 1, 2
    /// or [`MISSING`], marker names must be unique, and the phenotype must be
    /// 0/1 with at least one subject in each class.
    pub fn new(marker_names: Vec<String>, columns: Vec<Vec<u8>>, phenotype: Vec<u8>) -> Result<Self> {
        if marker_names.len() != columns.len() {
            return Err(Error::Validation(format!(
                "{} marker names for {} genotype columns",
                marker_names.len(),
                columns.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &marker_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Validation(format!("duplicate marker name {name:?}")));
            }
        }
        let n = phenotype.len();
        for (m, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Validation(format!(
                    "marker {:?} has {} genotypes for {} subjects",
                    marker_names[m],
                    col.len(),
                    n
                )));
            }
            if let Some(s) = col.iter().position(|&g| g > MISSING) {
                return Err(Error::Validation(format!(
                    "marker {:?}, subject {}: invalid genotype code {}",
                    marker_names[m], s, col[s]
                )));
            }
        }
        if let Some(s) = phenotype.iter().position(|&y| y > 1) {
            return Err(Error::Validation(format!(
                "subject {}: phenotype {} is not binary",
                s, phenotype[s]
            )));
        }
        let cases = phenotype.iter().filter(|&&y| y == 1).count();
        if cases == 0 || cases == n {
            return Err(Error::Validation(String::from(
                "phenotype needs at least one case and one control",
            )));
        }
        Ok(Self { marker_names, columns, phenotype })
    }

    pub fn n_subjects(&self) -> usize {
        self.phenotype.len()
    }

    pub fn n_markers(&self) -> usize {
        self.columns.len()
    }

    pub fn n_cases(&self) -> usize {
        self.phenotype.iter().filter(|&&y| y == 1).count()
    }

    pub fn n_controls(&self) -> usize {
        self.n_subjects() - self.n_cases()
    }

    pub fn marker_names(&self) -> &[String] {
        &self.marker_names
    }

    pub fn marker_name(&self, m: usize) -> &str {
        &self.marker_names[m]
    }

    pub fn marker_index(&self, name: &str) -> Option<usize> {
        self.marker_names.iter().position(|n| n == name)
    }

    /// Genotype codes of marker `m`, one per subject.
    pub fn column(&self, m: usize) -> &[u8] {
        &self.columns[m]
    }

    pub fn columns(&self) -> &[Vec<u8>] {
        &self.columns
    }

    pub fn phenotype(&self) -> &[u8] {
        &self.phenotype
    }

    pub fn genotype(&self, subject: usize, marker: usize) -> u8 {
        self.columns[marker][subject]
    }

    pub(crate) fn check_marker(&self, m: usize) -> Result<()> {
        if m < self.n_markers() {
            Ok(())
        } else {
            Err(Error::MarkerOutOfRange { index: m, n_markers: self.n_markers() })
        }
    }

    /// Number of distinct non-missing codes observed at marker `m`.
    pub fn n_categories(&self, m: usize) -> usize {
        let mut present = [false; 3];
        for &g in &self.columns[m] {
            if g != MISSING {
                present[g as usize] = true;
            }
        }
        present.iter().filter(|&&p| p).count()
    }

    /// Markers with at least two populated categories.
    pub fn testable_markers(&self) -> Vec<usize> {
        (0..self.n_markers()).filter(|&m| self.n_categories(m) >= 2).collect()
    }

    /// Returns a copy restricted to the given markers, in the given order.
    pub fn select_markers(&self, markers: &[usize]) -> Result<Self> {
        for &m in markers {
            self.check_marker(m)?;
        }
        Self::new(
            markers.iter().map(|&m| self.marker_names[m].clone()).collect(),
            markers.iter().map(|&m| self.columns[m].clone()).collect(),
            self.phenotype.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::d0;
    use alloc::vec;

    #[test]
    fn fixture_shape() {
        let d = d0();
        assert_eq!(d.n_subjects(), 8);
        assert_eq!(d.n_markers(), 2);
        assert_eq!((d.n_cases(), d.n_controls()), (4, 4));
    }

    #[test]
    fn smallest_valid_input() {
        let d = GenotypeDataset::new(vec!["a".into()], vec![vec![0, 2]], vec![1, 0]).unwrap();
        assert_eq!((d.n_cases(), d.n_controls()), (1, 1));
        assert_eq!(d.column(0), &[0, 2]);
    }

    #[test]
    fn rejects_single_class_phenotype() {
        let err = GenotypeDataset::new(vec!["a".into()], vec![vec![0, 1]], vec![1, 1]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_bad_codes_and_names() {
        assert!(GenotypeDataset::new(vec!["a".into()], vec![vec![0, 4]], vec![1, 0]).is_err());
        assert!(GenotypeDataset::new(vec!["a".into()], vec![vec![0, 1]], vec![2, 0]).is_err());
        assert!(GenotypeDataset::new(
            vec!["a".into(), "a".into()],
            vec![vec![0, 1], vec![1, 1]],
            vec![1, 0]
        )
        .is_err());
        assert!(GenotypeDataset::new(vec!["a".into()], vec![vec![0]], vec![1, 0]).is_err());
    }

    #[test]
    fn testable_markers_skip_constant_and_missing() {
        let d = GenotypeDataset::new(
            vec!["c".into(), "m".into(), "ok".into()],
            vec![vec![1, 1, 1], vec![MISSING; 3], vec![0, 1, MISSING]],
            vec![1, 0, 1],
        )
        .unwrap();
        assert_eq!(d.testable_markers(), vec![2]);
    }
}
