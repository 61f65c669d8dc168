//! Tokenization, sentence segmentation and stemming.
//!
//! Everything here is a pure function of its input.

mod porter;

pub use porter::stem;

use serde::{Deserialize, Serialize};

/// Lowercased word tokens with the byte span each one came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
    spans: Vec<(usize, usize)>,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// `(byte offset, byte length)` of each token in the source text.
    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn join(&self, sep: &str) -> String {
        self.tokens.join(sep)
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenSeq {
    /// Builds a sequence from pre-split words, as if they had been joined by single spaces.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let words: Vec<String> = iter.into_iter().map(|s| s.as_ref().to_owned()).collect();
        tokenize(&words.join(" "))
    }
}

/// Splits text into maximal runs of Unicode letters and digits, lowercased.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut out = TokenSeq::default();
    let mut start: Option<usize> = None;
    let flush = |out: &mut TokenSeq, from: usize, to: usize| {
        let token: String = text[from..to]
            .chars()
            .flat_map(char::to_lowercase)
            .filter(|c| c.is_alphanumeric())
            .collect();
        if !token.is_empty() {
            out.tokens.push(token);
            out.spans.push((from, to - from));
        }
    };
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                flush(&mut out, s, i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        flush(&mut out, s, text.len());
    }
    out
}

/// Sentences of a review, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSeq {
    sentences: Vec<String>,
}

impl SentenceSeq {
    pub fn new(sentences: Vec<String>) -> Self {
        Self { sentences }
    }

    pub fn count(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(String::as_str)
    }
}

/// Lowercased words after which a period does not end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "al.", "e.g.", "i.e.", "eg.", "ie.", "cf.", "vs.", "fig.", "figs.", "eq.", "eqs.", "sec.",
    "secs.", "tab.", "ref.", "refs.", "no.", "approx.", "resp.", "dr.", "prof.", "mr.", "ms.",
    "mrs.", "st.", "p.", "pp.", "vol.", "ch.", "thm.", "def.", "alg.", "appx.", "app.",
];

/// Whitespace-collapsed, trimmed form of `text`; sentences joined by a single
/// space reproduce it.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}')
}

/// Rule-based sentence splitter.
///
/// A sentence ends at a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) followed by whitespace or the end of the text, unless the word
/// carrying a lone period is a known abbreviation.
pub fn split_sentences(text: &str) -> SentenceSeq {
    let norm = normalize_whitespace(text);
    let mut sentences = Vec::new();
    let mut start = 0;
    for (word_start, word) in words_with_offsets(&norm) {
        if ends_sentence(word) {
            let end = word_start + word.len();
            sentences.push(norm[start..end].to_owned());
            start = (end + 1).min(norm.len());
        }
    }
    if start < norm.len() {
        sentences.push(norm[start..].to_owned());
    }
    SentenceSeq { sentences }
}

fn words_with_offsets(norm: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    norm.split(' ').filter(|w| !w.is_empty()).map(move |w| {
        let at = norm[offset..].find(w).map_or(offset, |p| p + offset);
        offset = at + w.len();
        (at, w)
    })
}

fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(is_closer);
    let Some(last) = core.chars().last() else { return false };
    if !is_terminal(last) {
        return false;
    }
    let terminals = core.chars().rev().take_while(|&c| is_terminal(c)).count();
    if last == '.' && terminals == 1 {
        let lowered = core
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if ABBREVIATIONS.contains(&lowered.as_str()) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).tokens().to_vec()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("The cat, the CAT."), ["the", "cat", "the", "cat"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("Eq. (2)-(5)"), ["eq", "2", "5"]);
    }

    #[test]
    fn spans_point_at_source() {
        let text = "  Hello, Wörld 42!";
        let t = tokenize(text);
        let pieces: Vec<_> = t.spans().iter().map(|&(o, l)| &text[o..o + l]).collect();
        assert_eq!(pieces, ["Hello", "Wörld", "42"]);
        assert!(t.spans().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_sentences("Good. Bad!").count(), 2);
        assert_eq!(split_sentences("See Fig. 2 here.").count(), 1);
        assert_eq!(split_sentences("").count(), 0);
        assert_eq!(split_sentences("   \n ").count(), 0);
    }

    #[test]
    fn split_guards() {
        let s = split_sentences("As shown by Smith et al. the loss drops, e.g. on CIFAR. Really?! Yes.");
        assert_eq!(
            s.sentences(),
            ["As shown by Smith et al. the loss drops, e.g. on CIFAR.", "Really?!", "Yes."]
        );
        let s = split_sentences("There is a lack of explanation in section 3.1. The rest is fine");
        assert_eq!(s.count(), 2);
        let s = split_sentences("He said \"stop.\" Then left.");
        assert_eq!(s.sentences(), ["He said \"stop.\"", "Then left."]);
    }

    proptest! {
        #[test]
        fn tokenize_fixpoint(s in "\\PC{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once.tokens(), twice.tokens());
            prop_assert!(once.tokens().iter().all(|t| !t.is_empty()));
        }

        #[test]
        fn sentences_reconstruct_input(s in "[a-zA-Z .!?,\n]{0,80}") {
            let seq = split_sentences(&s);
            prop_assert_eq!(seq.sentences().join(" "), normalize_whitespace(&s));
            if s.chars().any(|c| !c.is_whitespace()) {
                prop_assert!(seq.count() >= 1);
            }
        }
    }
}
