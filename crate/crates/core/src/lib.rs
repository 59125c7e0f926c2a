//! Context-free tree grammars, the lifting into derived (regular) tree
//! grammars, and monadic second-order logic over words and trees.

pub mod alphabets;
pub mod grammars;
pub mod lifting;
pub mod mso;
pub mod sample;
pub mod syntax;
pub mod terms;

pub use alphabets::{DerivedSymbol, RankedAlphabet, RankedSymbol, SymbolKind};
pub use grammars::{Bounds, Cftg, Production};
pub use lifting::{beta, lift_grammar, lift_term, DerivedTerm};
pub use mso::{Formula, Interpretation};
pub use terms::{parse_term, parse_term_inferred, Address, Structure, Term, Word};
