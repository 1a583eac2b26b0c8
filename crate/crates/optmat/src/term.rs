//! RDF terms and the coordinate spaces they are encoded into.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Iri,
    BlankNode,
    Literal,
}

/// An RDF term. IRIs are stored without angle brackets; literals keep their
/// full lexical form (quotes, language tag, datatype suffix) verbatim, so two
/// literals are equal iff they were written identically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
}

impl Term {
    pub fn iri(lexical: impl Into<String>) -> Term {
        Term { kind: TermKind::Iri, lexical: lexical.into() }
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term { kind: TermKind::BlankNode, lexical: label.into() }
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term { kind: TermKind::Literal, lexical: lexical.into() }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::BlankNode => write!(f, "_:{}", self.lexical),
            TermKind::Literal => write!(f, "{}", self.lexical),
        }
    }
}

/// 1-based coordinate of a term inside one coordinate space.
pub type TermId = u32;

/// The three coordinate spaces of the triple cube. Subject and object share
/// their low range: terms occurring in both positions get one id valid in
/// either space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Subject,
    Object,
    Predicate,
}

/// A triple encoded into coordinates: `s` in the subject space, `p` in the
/// predicate space, `o` in the object space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncodedTriple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}
