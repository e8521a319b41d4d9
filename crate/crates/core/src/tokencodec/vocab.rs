use std::collections::HashMap;
use std::ops::Range;

use crate::error::{bail, Result};
use crate::types::Modality;

pub const EOS_WORD: &str = "<EOS>";
pub const PAD_WORD: &str = "<PAD>";
pub const BOS_WORD: &str = "<BOS>";

/// Unified lexicon: text words, language/modality prompt tags, one motion
/// sub-vocabulary per modality, then the special tokens. Ids are contiguous
/// from zero in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, usize>,
    n_text: usize,
    languages: Vec<String>,
    motion: [Range<usize>; 4],
    eos: usize,
}

/// Word for the `index`-th (0-based) code of a modality, e.g. `<f_1>`.
pub fn motion_word(modality: Modality, index: usize) -> String {
    format!("<{}_{}>", modality.short(), index + 1)
}

pub fn tag_word(language: &str, modality: Modality) -> String {
    format!("<{}_{}>", language, modality.short().to_uppercase())
}

pub fn build_vocabulary<S: AsRef<str>, L: AsRef<str>>(
    text_words: &[S],
    languages: &[L],
    codebook_sizes: [usize; 4],
) -> Result<Vocabulary> {
    if let Some(m) = Modality::ALL.iter().find(|m| codebook_sizes[m.index()] == 0) {
        bail!(Usage, "{} codebook size must be positive", m.name());
    }
    let mut words = Vec::new();
    let mut ids = HashMap::new();
    let mut push = |w: String, words: &mut Vec<String>| -> Result<()> {
        if ids.contains_key(&w) {
            bail!(Data, "duplicate vocabulary word `{w}`");
        }
        ids.insert(w.clone(), words.len());
        words.push(w);
        Ok(())
    };

    for w in text_words {
        let w = w.as_ref();
        if w.is_empty() || w.chars().any(char::is_whitespace) {
            bail!(Data, "text word `{w}` is empty or contains whitespace");
        }
        push(w.to_string(), &mut words)?;
    }
    let n_text = words.len();

    let mut langs = Vec::with_capacity(languages.len());
    for lang in languages {
        let lang = lang.as_ref();
        if lang.is_empty() || lang.chars().any(|c| c.is_whitespace() || c == '<' || c == '>') {
            bail!(Data, "invalid language name `{lang}`");
        }
        for m in Modality::ALL {
            push(tag_word(lang, m), &mut words)?;
        }
        langs.push(lang.to_string());
    }

    let mut motion: [Range<usize>; 4] = Default::default();
    for m in Modality::ALL {
        let start = words.len();
        for k in 0..codebook_sizes[m.index()] {
            push(motion_word(m, k), &mut words)?;
        }
        motion[m.index()] = start..words.len();
    }

    let eos = words.len();
    for w in [EOS_WORD, PAD_WORD, BOS_WORD] {
        push(w.to_string(), &mut words)?;
    }

    Ok(Vocabulary {
        words,
        ids,
        n_text,
        languages: langs,
        motion,
        eos,
    })
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn text_range(&self) -> Range<usize> {
        0..self.n_text
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn eos(&self) -> usize {
        self.eos
    }

    pub fn pad(&self) -> usize {
        self.eos + 1
    }

    pub fn bos(&self) -> usize {
        self.eos + 2
    }

    pub fn motion_range(&self, modality: Modality) -> Range<usize> {
        self.motion[modality.index()].clone()
    }

    pub fn codebook_size(&self, modality: Modality) -> usize {
        self.motion[modality.index()].len()
    }

    pub fn motion_id(&self, modality: Modality, index: usize) -> Result<usize> {
        let r = self.motion_range(modality);
        if index >= r.len() {
            bail!(
                Data,
                "{} token {index} outside codebook of {}",
                modality.name(),
                r.len()
            );
        }
        Ok(r.start + index)
    }

    /// Codebook index of a motion id, if it belongs to `modality`.
    pub fn motion_index(&self, modality: Modality, id: usize) -> Option<usize> {
        let r = self.motion_range(modality);
        r.contains(&id).then(|| id - r.start)
    }

    pub fn tag_id(&self, language: &str, modality: Modality) -> Result<usize> {
        match self.id(&tag_word(language, modality)) {
            Some(id) => Ok(id),
            None => bail!(Usage, "language `{language}` is not in the vocabulary"),
        }
    }

    /// One prompt tag per modality, in vocabulary modality order.
    pub fn prompt_tags(&self, language: &str) -> Result<[usize; 4]> {
        let mut tags = [0; 4];
        for m in Modality::ALL {
            tags[m.index()] = self.tag_id(language, m)?;
        }
        Ok(tags)
    }

    pub fn is_tag(&self, id: usize) -> bool {
        id >= self.n_text && id < self.motion[0].start
    }
}
