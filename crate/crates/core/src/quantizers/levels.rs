use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::types::TokenizerFamily;

/// Per-dimension FSQ level counts. The implicit codebook is the product grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    levels: Vec<usize>,
}

impl LevelSpec {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            bail!(Usage, "level spec needs at least one dimension");
        }
        if let Some(&l) = levels.iter().find(|&&l| l < 2) {
            bail!(Usage, "every dimension needs at least 2 levels, got {l}");
        }
        Ok(LevelSpec { levels })
    }

    /// {5,5,4} body, {6,6,5} hands, {6,6,6} face.
    pub fn preset(family: TokenizerFamily) -> Self {
        let levels = match family {
            TokenizerFamily::Body => vec![5, 5, 4],
            TokenizerFamily::Hand => vec![6, 6, 5],
            TokenizerFamily::Face => vec![6, 6, 6],
        };
        LevelSpec { levels }
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn dims(&self) -> usize {
        self.levels.len()
    }

    pub fn codebook_size(&self) -> usize {
        self.levels.iter().product()
    }

    /// Mixed-radix packing with the first dimension least significant:
    /// `index = Σ digitᵢ · Π_{j<i} Lⱼ`.
    pub fn digits_to_index(&self, digits: &[usize]) -> Result<usize> {
        digits_to_index(digits, self)
    }

    pub fn index_to_digits(&self, index: usize) -> Result<Vec<usize>> {
        index_to_digits(index, self)
    }
}

pub fn digits_to_index(digits: &[usize], spec: &LevelSpec) -> Result<usize> {
    if digits.len() != spec.dims() {
        bail!(
            Usage,
            "expected {} digits, got {}",
            spec.dims(),
            digits.len()
        );
    }
    let mut index = 0;
    let mut radix = 1;
    for (i, (&d, &l)) in digits.iter().zip(&spec.levels).enumerate() {
        if d >= l {
            bail!(Usage, "digit {d} out of range [0,{l}) in dimension {i}");
        }
        index += d * radix;
        radix *= l;
    }
    Ok(index)
}

pub fn index_to_digits(index: usize, spec: &LevelSpec) -> Result<Vec<usize>> {
    let size = spec.codebook_size();
    if index >= size {
        bail!(Usage, "token index {index} out of range [0,{size})");
    }
    let mut rest = index;
    Ok(spec
        .levels
        .iter()
        .map(|&l| {
            let d = rest % l;
            rest /= l;
            d
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_codebook_sizes() {
        assert_eq!(LevelSpec::preset(TokenizerFamily::Body).codebook_size(), 100);
        assert_eq!(LevelSpec::preset(TokenizerFamily::Hand).codebook_size(), 180);
        assert_eq!(LevelSpec::preset(TokenizerFamily::Face).codebook_size(), 216);
    }

    #[test]
    fn packing_examples() {
        let body = LevelSpec::preset(TokenizerFamily::Body);
        assert_eq!(body.digits_to_index(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(body.digits_to_index(&[4, 4, 3]).unwrap(), 99);
        assert_eq!(body.digits_to_index(&[1, 2, 3]).unwrap(), 86);
        assert_eq!(body.index_to_digits(86).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let body = LevelSpec::preset(TokenizerFamily::Body);
        assert!(body.digits_to_index(&[5, 0, 0]).is_err());
        assert!(body.digits_to_index(&[0, 0]).is_err());
        assert!(body.index_to_digits(100).is_err());
        assert!(LevelSpec::new(vec![5, 1]).is_err());
        assert!(LevelSpec::new(vec![]).is_err());
    }

    #[test]
    fn round_trip_on_all_presets() {
        for fam in [TokenizerFamily::Body, TokenizerFamily::Hand, TokenizerFamily::Face] {
            let spec = LevelSpec::preset(fam);
            for idx in 0..spec.codebook_size() {
                let digits = spec.index_to_digits(idx).unwrap();
                assert_eq!(spec.digits_to_index(&digits).unwrap(), idx);
            }
        }
    }
}
