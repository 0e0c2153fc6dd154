//! Bitplane encoding of a genotype dataset, pre-split by phenotype.
//!
//! Each marker owns four planes (codes 0, 1, 2 and missing). Every plane is a
//! case bitset followed by a control bitset; bit `i` of the case bitset is the
//! `i`-th case subject in file order, likewise for controls. A pair table is
//! then nine AND + popcount passes per group.
//!
//! Word layout of one marker block (`u64`, marker-major):
//! `[p0.case, p0.ctrl, p1.case, p1.ctrl, p2.case, p2.ctrl, miss.case, miss.ctrl]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};
use crate::table::{ContingencyTable, MAX_CATEGORIES};

/// Planes per marker: genotype codes 0, 1, 2, then missing.
pub const PLANES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Case,
    Control,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedGenotypes {
    n_subjects: usize,
    n_cases: usize,
    marker_names: Vec<String>,
    /// Phenotype as a subject-order bitset, bit set for cases.
    phenotype: Vec<u64>,
    words: Vec<u64>,
}

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl PackedGenotypes {
    pub fn pack(dataset: &GenotypeDataset) -> Self {
        let all: Vec<usize> = (0..dataset.n_markers()).collect();
        Self::pack_markers(dataset, &all)
    }

    /// Packs only `markers`, in that order.
    pub fn pack_markers(dataset: &GenotypeDataset, markers: &[usize]) -> Self {
        let phenotype = dataset.phenotype();
        let n = phenotype.len();
        let n_cases = phenotype.iter().filter(|&&y| y == 1).count();
        let mut packed = Self {
            n_subjects: n,
            n_cases,
            marker_names: markers.iter().map(|&m| dataset.marker_name(m).into()).collect(),
            phenotype: vec![0; words_for(n)],
            words: Vec::new(),
        };
        for (s, &y) in phenotype.iter().enumerate() {
            if y == 1 {
                packed.phenotype[s / 64] |= 1 << (s % 64);
            }
        }
        let (cw, kw) = (packed.case_words(), packed.control_words());
        let stride = packed.stride();
        packed.words = vec![0; stride * markers.len()];
        for (slot, &m) in markers.iter().enumerate() {
            let block = &mut packed.words[slot * stride..(slot + 1) * stride];
            let (mut ci, mut ki) = (0usize, 0usize);
            for (&g, &y) in dataset.column(m).iter().zip(phenotype) {
                let p = g as usize;
                if y == 1 {
                    block[p * (cw + kw) + ci / 64] |= 1 << (ci % 64);
                    ci += 1;
                } else {
                    block[p * (cw + kw) + cw + ki / 64] |= 1 << (ki % 64);
                    ki += 1;
                }
            }
        }
        packed
    }

    /// Reassembles a packed encoding from its raw parts, checking that every
    /// subject sits in exactly one plane and that padding bits are clear.
    pub fn from_raw_parts(
        n_subjects: usize,
        marker_names: Vec<String>,
        phenotype: Vec<u64>,
        words: Vec<u64>,
    ) -> Result<Self> {
        if phenotype.len() != words_for(n_subjects) {
            return Err(Error::Validation(format!(
                "phenotype bitset has {} words, expected {}",
                phenotype.len(),
                words_for(n_subjects)
            )));
        }
        if !tail_clear(&phenotype, n_subjects) {
            return Err(Error::Validation("phenotype bitset has bits past the last subject".into()));
        }
        let n_cases = phenotype.iter().map(|w| w.count_ones() as usize).sum();
        let packed = Self { n_subjects, n_cases, marker_names, phenotype, words };
        if packed.words.len() != packed.stride() * packed.marker_names.len() {
            return Err(Error::Validation(format!(
                "{} plane words for {} markers, expected {}",
                packed.words.len(),
                packed.marker_names.len(),
                packed.stride() * packed.marker_names.len()
            )));
        }
        for m in 0..packed.n_markers() {
            for group in [Group::Case, Group::Control] {
                let bits = packed.group_size(group);
                let mut union = vec![0u64; words_for(bits)];
                for p in 0..PLANES {
                    let plane = packed.plane(m, p, group);
                    if !tail_clear(plane, bits) {
                        return Err(Error::Validation(format!("marker {m}: padding bits set")));
                    }
                    for (u, &w) in union.iter_mut().zip(plane) {
                        if *u & w != 0 {
                            return Err(Error::Validation(format!(
                                "marker {m}: subject in more than one plane"
                            )));
                        }
                        *u |= w;
                    }
                }
                if union.iter().map(|w| w.count_ones() as usize).sum::<usize>() != bits {
                    return Err(Error::Validation(format!("marker {m}: subject in no plane")));
                }
            }
        }
        if packed.n_cases == 0 || packed.n_cases == n_subjects {
            return Err(Error::Validation("phenotype needs at least one case and one control".into()));
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for name in &packed.marker_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Validation(format!("duplicate marker name {name:?}")));
            }
        }
        Ok(packed)
    }

    pub fn unpack(&self) -> Result<GenotypeDataset> {
        let n = self.n_subjects;
        let phenotype: Vec<u8> =
            (0..n).map(|s| ((self.phenotype[s / 64] >> (s % 64)) & 1) as u8).collect();
        // subject index of the i-th case / i-th control
        let mut members: [Vec<usize>; 2] = [Vec::with_capacity(self.n_cases), Vec::with_capacity(n - self.n_cases)];
        for (s, &y) in phenotype.iter().enumerate() {
            members[(y == 0) as usize].push(s);
        }
        let mut columns = Vec::with_capacity(self.n_markers());
        for m in 0..self.n_markers() {
            let mut col = vec![MISSING; n];
            for (g, group) in [Group::Case, Group::Control].into_iter().enumerate() {
                for code in 0..3u8 {
                    for (wi, &word) in self.plane(m, code as usize, group).iter().enumerate() {
                        let mut w = word;
                        while w != 0 {
                            col[members[g][wi * 64 + w.trailing_zeros() as usize]] = code;
                            w &= w - 1;
                        }
                    }
                }
            }
            columns.push(col);
        }
        GenotypeDataset::new(self.marker_names.clone(), columns, phenotype)
    }

    pub fn n_subjects(&self) -> usize {
        self.n_subjects
    }

    pub fn n_markers(&self) -> usize {
        self.marker_names.len()
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    pub fn n_controls(&self) -> usize {
        self.n_subjects - self.n_cases
    }

    pub fn marker_names(&self) -> &[String] {
        &self.marker_names
    }

    pub fn phenotype_words(&self) -> &[u64] {
        &self.phenotype
    }

    /// All plane words, marker-major.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn case_words(&self) -> usize {
        words_for(self.n_cases)
    }

    pub fn control_words(&self) -> usize {
        words_for(self.n_controls())
    }

    fn group_size(&self, group: Group) -> usize {
        match group {
            Group::Case => self.n_cases,
            Group::Control => self.n_controls(),
        }
    }

    /// Words per marker block.
    pub fn stride(&self) -> usize {
        PLANES * (self.case_words() + self.control_words())
    }

    /// Bitset of `group` subjects carrying `code` at `marker` (code 3 = missing).
    pub fn plane(&self, marker: usize, code: usize, group: Group) -> &[u64] {
        let (cw, kw) = (self.case_words(), self.control_words());
        let start = marker * self.stride() + code * (cw + kw);
        match group {
            Group::Case => &self.words[start..start + cw],
            Group::Control => &self.words[start + cw..start + cw + kw],
        }
    }

    fn check_marker(&self, m: usize) -> Result<()> {
        if m < self.n_markers() {
            Ok(())
        } else {
            Err(Error::MarkerOutOfRange { index: m, n_markers: self.n_markers() })
        }
    }

    pub fn tabulate_single(&self, marker: usize) -> Result<ContingencyTable> {
        self.check_marker(marker)?;
        let mut cases = [0u32; 3];
        let mut controls = [0u32; 3];
        for code in 0..3 {
            cases[code] = popcount(self.plane(marker, code, Group::Case));
            controls[code] = popcount(self.plane(marker, code, Group::Control));
        }
        ContingencyTable::from_counts(&cases, &controls)
    }

    /// Pair table by AND + popcount; identical to [`crate::table::tabulate_pair`].
    pub fn tabulate_pair(&self, m1: usize, m2: usize) -> Result<ContingencyTable> {
        self.check_marker(m1)?;
        self.check_marker(m2)?;
        if m1 == m2 {
            return Err(Error::SameMarker(m1));
        }
        let mut cases = [0u32; MAX_CATEGORIES];
        let mut controls = [0u32; MAX_CATEGORIES];
        for g1 in 0..3 {
            let a_case = self.plane(m1, g1, Group::Case);
            let a_ctrl = self.plane(m1, g1, Group::Control);
            for g2 in 0..3 {
                cases[3 * g1 + g2] = and_popcount(a_case, self.plane(m2, g2, Group::Case));
                controls[3 * g1 + g2] = and_popcount(a_ctrl, self.plane(m2, g2, Group::Control));
            }
        }
        ContingencyTable::from_counts(&cases, &controls)
    }
}

fn tail_clear(words: &[u64], bits: usize) -> bool {
    let rem = bits % 64;
    match words.last() {
        Some(&last) if rem != 0 => last >> rem == 0,
        _ => true,
    }
}

#[inline]
pub(crate) fn popcount(words: &[u64]) -> u32 {
    words.iter().map(|w| w.count_ones()).sum()
}

#[inline]
pub(crate) fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}
