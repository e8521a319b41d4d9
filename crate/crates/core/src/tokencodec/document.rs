use std::fmt::Write as _;
use std::path::Path;

use super::vocab::Vocabulary;
use crate::error::{bail, Error, Result};
use crate::quantizers::TokenStream;
use crate::types::Modality;

pub const DOCUMENT_MAGIC: &str = "m3t-tokens";
pub const DOCUMENT_VERSION: &str = "v1";

/// One token id per modality for a single time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiModalStep {
    pub ids: [usize; 4],
}

impl MultiModalStep {
    pub fn new(ids: [usize; 4]) -> Self {
        MultiModalStep { ids }
    }

    pub fn get(&self, modality: Modality) -> usize {
        self.ids[modality.index()]
    }

    /// First modality, in vocabulary order, that emitted end-of-sequence.
    pub fn eos_modality(&self, vocab: &Vocabulary) -> Option<Modality> {
        Modality::ALL
            .into_iter()
            .find(|m| self.ids[m.index()] == vocab.eos())
    }
}

/// A token-stream document: the steps plus the modality whose
/// end-of-sequence closed the decode, when one did.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenDocument {
    pub steps: Vec<MultiModalStep>,
    pub eos: Option<Modality>,
}

/// Each id is a code of its modality, end-of-sequence, or padding.
pub fn check_step(step: &MultiModalStep, vocab: &Vocabulary) -> Result<()> {
    for m in Modality::ALL {
        let id = step.get(m);
        if vocab.motion_index(m, id).is_none() && id != vocab.eos() && id != vocab.pad() {
            bail!(
                Data,
                "id {id} is not a {} token, <EOS> or <PAD>",
                m.name()
            );
        }
    }
    Ok(())
}

pub fn serialize_streams(doc: &TokenDocument, vocab: &Vocabulary) -> Result<String> {
    let mut out = format!(
        "{DOCUMENT_MAGIC} {DOCUMENT_VERSION} steps={}\n",
        doc.steps.len()
    );
    for step in &doc.steps {
        check_step(step, vocab)?;
        let words: Vec<&str> = step
            .ids
            .iter()
            .map(|&id| vocab.word(id).expect("checked id"))
            .collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    if let Some(m) = doc.eos {
        let _ = writeln!(out, "<EOS:{}>", m.name());
    }
    Ok(out)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<usize> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        [magic, version, steps] if *magic == DOCUMENT_MAGIC => {
            if *version != DOCUMENT_VERSION {
                return Err(parse_err(1, format!("unsupported version `{version}`")));
            }
            steps
                .strip_prefix("steps=")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| parse_err(1, format!("bad step count `{steps}`")))
        }
        _ => Err(parse_err(
            1,
            format!("expected `{DOCUMENT_MAGIC} {DOCUMENT_VERSION} steps=<N>`"),
        )),
    }
}

pub fn parse_streams(text: &str, vocab: &Vocabulary) -> Result<TokenDocument> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(parse_err(1, "empty token document"));
    };
    let expected = parse_header(header)?;
    let mut doc = TokenDocument::default();
    let mut last_line = 1;

    for (no, line) in lines {
        last_line = no;
        if doc.eos.is_some() {
            return Err(parse_err(no, "content after the <EOS:…> trailer"));
        }
        if let Some(name) = line.strip_prefix("<EOS:").and_then(|r| r.strip_suffix('>')) {
            let m: Modality = name
                .parse()
                .map_err(|_| parse_err(no, format!("unknown modality `{name}` in trailer")))?;
            doc.eos = Some(m);
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(parse_err(
                no,
                format!("expected 4 token words, found {}", words.len()),
            ));
        }
        let mut ids = [0; 4];
        for (m, word) in Modality::ALL.into_iter().zip(&words) {
            let id = vocab
                .id(word)
                .ok_or_else(|| parse_err(no, format!("unknown token `{word}`")))?;
            ids[m.index()] = id;
        }
        let step = MultiModalStep::new(ids);
        check_step(&step, vocab).map_err(|e| parse_err(no, e.to_string()))?;
        doc.steps.push(step);
    }

    if doc.steps.len() != expected {
        return Err(parse_err(
            last_line,
            format!(
                "header declares {expected} steps, found {}",
                doc.steps.len()
            ),
        ));
    }
    Ok(doc)
}

pub fn load_document(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<TokenDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_streams(&text, vocab)
}

pub fn save_document(path: impl AsRef<Path>, doc: &TokenDocument, vocab: &Vocabulary) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, serialize_streams(doc, vocab)?).map_err(|e| Error::io(path, e))
}

/// Zip per-modality token streams into steps. Modalities without a stream are
/// filled with `<PAD>`; the given streams must have equal lengths.
pub fn steps_from_streams(streams: &[TokenStream], vocab: &Vocabulary) -> Result<Vec<MultiModalStep>> {
    let mut slots: [Option<&TokenStream>; 4] = [None; 4];
    for s in streams {
        let slot = &mut slots[s.modality.index()];
        if slot.is_some() {
            bail!(Usage, "two {} streams given", s.modality.name());
        }
        *slot = Some(s);
    }
    let len = match streams.first() {
        Some(s) => s.indices.len(),
        None => return Ok(Vec::new()),
    };
    if let Some(s) = streams.iter().find(|s| s.indices.len() != len) {
        bail!(
            Usage,
            "stream lengths differ: {} has {}, expected {len}",
            s.modality.name(),
            s.indices.len()
        );
    }
    (0..len)
        .map(|u| {
            let mut ids = [vocab.pad(); 4];
            for m in Modality::ALL {
                if let Some(s) = slots[m.index()] {
                    ids[m.index()] = vocab.motion_id(m, s.indices[u])?;
                }
            }
            Ok(MultiModalStep::new(ids))
        })
        .collect()
}

/// Split steps back into one stream per present modality. Decoding stops at
/// the first step that carries `<EOS>`; that step itself is dropped. A
/// modality that is all `<PAD>` yields no stream.
pub fn streams_from_steps(
    steps: &[MultiModalStep],
    language: &str,
    vocab: &Vocabulary,
) -> Result<Vec<TokenStream>> {
    let end = steps
        .iter()
        .position(|s| s.eos_modality(vocab).is_some())
        .unwrap_or(steps.len());
    let terminated = end < steps.len();
    let body = &steps[..end];

    let mut out = Vec::new();
    for m in Modality::ALL {
        let pads = body.iter().filter(|s| s.get(m) == vocab.pad()).count();
        if pads == body.len() {
            continue;
        }
        if pads > 0 {
            bail!(Data, "{} stream mixes <PAD> with motion tokens", m.name());
        }
        let indices = body
            .iter()
            .map(|s| {
                vocab
                    .motion_index(m, s.get(m))
                    .ok_or_else(|| Error::Data(format!("id {} is not a {} token", s.get(m), m.name())))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut stream = TokenStream::new(m, language, indices);
        stream.includes_eos = terminated;
        out.push(stream);
    }
    Ok(out)
}
