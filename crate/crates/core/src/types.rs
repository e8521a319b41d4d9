use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One articulator stream. Order matches the vocabulary layout: body,
/// left hand, right hand, face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Body,
    LeftHand,
    RightHand,
    Face,
}

impl Modality {
    pub const ALL: [Modality; 4] = [
        Modality::Body,
        Modality::LeftHand,
        Modality::RightHand,
        Modality::Face,
    ];

    pub fn index(self) -> usize {
        match self {
            Modality::Body => 0,
            Modality::LeftHand => 1,
            Modality::RightHand => 2,
            Modality::Face => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Body => "body",
            Modality::LeftHand => "left_hand",
            Modality::RightHand => "right_hand",
            Modality::Face => "face",
        }
    }

    /// Short tag used inside vocabulary words, e.g. `<lh_12>` or `<ASL_LH>`.
    pub fn short(self) -> &'static str {
        match self {
            Modality::Body => "b",
            Modality::LeftHand => "lh",
            Modality::RightHand => "rh",
            Modality::Face => "f",
        }
    }

    /// Per-frame parameter count: 10 body joints, 15 hand joints in 6D, or
    /// 100 expression + 2 eyelid + 6 jaw coefficients.
    pub fn frame_dim(self) -> usize {
        match self {
            Modality::Body => 60,
            Modality::LeftHand | Modality::RightHand => 90,
            Modality::Face => 108,
        }
    }

    /// The tokenizer family that serves this stream. Both hands share one.
    pub fn family(self) -> TokenizerFamily {
        match self {
            Modality::Body => TokenizerFamily::Body,
            Modality::LeftHand | Modality::RightHand => TokenizerFamily::Hand,
            Modality::Face => TokenizerFamily::Face,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Modality::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "body" | "b" => Ok(Modality::Body),
            "left_hand" | "lh" | "left" => Ok(Modality::LeftHand),
            "right_hand" | "rh" | "right" => Ok(Modality::RightHand),
            "face" | "f" => Ok(Modality::Face),
            other => Err(Error::Usage(format!("unknown modality `{other}`"))),
        }
    }
}

/// Modality group that owns a tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerFamily {
    Body,
    Hand,
    Face,
}

impl TokenizerFamily {
    pub fn input_dim(self) -> usize {
        match self {
            TokenizerFamily::Body => 60,
            TokenizerFamily::Hand => 90,
            TokenizerFamily::Face => 108,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TokenizerFamily::Body => "body",
            TokenizerFamily::Hand => "hand",
            TokenizerFamily::Face => "face",
        }
    }

    /// Stream presented to the tokenizer without mirroring.
    pub fn canonical_modality(self) -> Modality {
        match self {
            TokenizerFamily::Body => Modality::Body,
            TokenizerFamily::Hand => Modality::RightHand,
            TokenizerFamily::Face => Modality::Face,
        }
    }

    pub fn accepts(self, modality: Modality) -> bool {
        modality.family() == self
    }
}

impl fmt::Display for TokenizerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
