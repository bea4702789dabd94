//! The order-16 quaternion group realised as permutations of sixteen cells.
//!
//! Cells are numbered `1..=16` everywhere a human sees them (reports, cycle
//! notation, CLI output) and `0..16` inside [`Perm16`].

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of cells in the network (and the order of the group).
pub const CELLS: usize = 16;

/// A permutation of the sixteen cells.
///
/// `images[i]` is the (zero-based) image of cell `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm16 {
    images: [u8; CELLS],
}

impl Perm16 {
    pub const fn identity() -> Self {
        let mut images = [0u8; CELLS];
        let mut i = 0;
        while i < CELLS {
            images[i] = i as u8;
            i += 1;
        }
        Self { images }
    }

    /// Builds a permutation from zero-based images, checking bijectivity.
    pub fn from_images(images: [usize; CELLS]) -> Result<Self> {
        let mut seen = [false; CELLS];
        let mut out = [0u8; CELLS];
        for (i, &img) in images.iter().enumerate() {
            if img >= CELLS {
                return Err(Error::InvalidPermutation(format!(
                    "image {} out of range",
                    img + 1
                )));
            }
            if seen[img] {
                return Err(Error::InvalidPermutation(format!(
                    "cell {} hit twice",
                    img + 1
                )));
            }
            seen[img] = true;
            out[i] = img as u8;
        }
        Ok(Self { images: out })
    }

    /// Builds a permutation from one-based images.
    pub fn from_one_based(images: [usize; CELLS]) -> Result<Self> {
        let mut zero = [0usize; CELLS];
        for (z, &i) in zero.iter_mut().zip(images.iter()) {
            if i == 0 {
                return Err(Error::InvalidPermutation("cell 0 in one-based data".into()));
            }
            *z = i - 1;
        }
        Self::from_images(zero)
    }

    /// Builds a permutation from disjoint one-based cycles, e.g.
    /// `[[1, 2, 3], [4, 5]]` for `(1 2 3)(4 5)`.
    pub fn from_cycles<C: AsRef<[usize]>>(cycles: &[C]) -> Result<Self> {
        let mut images = [usize::MAX; CELLS];
        for cycle in cycles {
            let cycle = cycle.as_ref();
            for (k, &c) in cycle.iter().enumerate() {
                if c == 0 || c > CELLS {
                    return Err(Error::InvalidPermutation(format!(
                        "symbol {c} out of range"
                    )));
                }
                if images[c - 1] != usize::MAX {
                    return Err(Error::InvalidPermutation(format!("symbol {c} repeated")));
                }
                images[c - 1] = cycle[(k + 1) % cycle.len()] - 1;
            }
        }
        for (i, img) in images.iter_mut().enumerate() {
            if *img == usize::MAX {
                *img = i;
            }
        }
        Self::from_images(images)
    }

    /// Parses cycle notation such as `"(1 2 3 4)(5 6)"`.
    pub fn parse_cycles(text: &str) -> Result<Self> {
        Self::from_cycles(&parse_cycle_lists(text)?)
    }

    /// Zero-based image of zero-based cell `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// One-based image of one-based cell `i`.
    pub fn image_of(&self, cell: usize) -> usize {
        self.apply(cell - 1) + 1
    }

    /// Zero-based images.
    pub fn images(&self) -> [usize; CELLS] {
        self.images.map(|v| v as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut images = [0u8; CELLS];
        for (i, &img) in self.images.iter().enumerate() {
            images[img as usize] = i as u8;
        }
        Self { images }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| compose(self, &acc))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn order(&self) -> u32 {
        let mut p = *self;
        let mut n = 1;
        while !p.is_identity() {
            p = compose(self, &p);
            n += 1;
        }
        n
    }

    /// Non-trivial cycles, one-based, each starting at its smallest symbol.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = [false; CELLS];
        let mut out = Vec::new();
        for start in 0..CELLS {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start + 1];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cycle.push(j + 1);
                j = self.apply(j);
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn cycle_notation(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let body: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("({})", body.join(" "))
            })
            .collect()
    }
}

impl fmt::Debug for Perm16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm16{}", self.cycle_notation())
    }
}

impl fmt::Display for Perm16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}

/// `p ∘ q`: apply `q` first, then `p`.
pub fn compose(p: &Perm16, q: &Perm16) -> Perm16 {
    let mut images = [0u8; CELLS];
    for (i, img) in images.iter_mut().enumerate() {
        *img = p.images[q.apply(i)];
    }
    Perm16 { images }
}

/// Splits cycle notation into symbol lists without checking for repeats.
pub fn parse_cycle_lists(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced cycle in {text:?}")))?;
        let symbols = open[..close]
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad symbol {s:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !symbols.is_empty() {
            out.push(symbols);
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}

/// The generators `a` and `b`, taken from the a-row and b-row of the printed
/// element list. Every other printed row is audit data only.
pub fn generators_from_paper() -> (Perm16, Perm16) {
    let a = Perm16::from_cycles(&[
        vec![1, 2, 3, 4, 9, 10, 11, 12],
        vec![5, 16, 15, 14, 13, 8, 7, 6],
    ])
    .expect("hard-coded a is a permutation");
    let b = Perm16::from_cycles(&[
        vec![1, 5, 9, 13],
        vec![2, 6, 10, 14],
        vec![3, 7, 11, 15],
        vec![4, 8, 12, 16],
    ])
    .expect("hard-coded b is a permutation");
    (a, b)
}

/// A word in the generators `a` and `b`; `"ab"` denotes `a ∘ b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub String);

impl Word {
    /// Parses labels like `"a^3b^2"`, `"ba"`, `"Id"` or `"e"`.
    pub fn parse(label: &str) -> Result<Self> {
        let label: String = label.chars().filter(|c| !c.is_whitespace()).collect();
        if label.is_empty() || label == "Id" || label == "e" || label == "1" {
            return Ok(Word(String::new()));
        }
        let mut out = String::new();
        let mut chars = label.chars().peekable();
        while let Some(c) = chars.next() {
            if c != 'a' && c != 'b' {
                return Err(Error::Parse(format!("unexpected {c:?} in word {label:?}")));
            }
            let mut exp = 1usize;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                exp = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {label:?}")))?;
            }
            out.extend(std::iter::repeat_n(c, exp));
        }
        Ok(Word(out))
    }

    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.0.chars()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Evaluates the word as a permutation given the generators.
    pub fn evaluate(&self, a: &Perm16, b: &Perm16) -> Perm16 {
        self.letters().fold(Perm16::identity(), |acc, c| {
            compose(&acc, if c == 'a' { a } else { b })
        })
    }
}

impl fmt::Display for Word {
    /// Run-length form: `aaabb` prints as `a^3b^2`, the empty word as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        let bytes = self.0.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let mut j = i;
            while j < bytes.len() && bytes[j] == c {
                j += 1;
            }
            let run = j - i;
            if run == 1 {
                write!(f, "{}", c as char)?;
            } else {
                write!(f, "{}^{}", c as char, run)?;
            }
            i = j;
        }
        Ok(())
    }
}

/// Closed set of permutations with its multiplication table.
#[derive(Clone, Debug)]
pub struct GroupTable {
    elements: Vec<Perm16>,
    words: Vec<Word>,
    /// `mult[i][j]` is the index of `elements[i] ∘ elements[j]`.
    mult: Vec<Vec<usize>>,
    index: HashMap<Perm16, usize>,
    gen_a: usize,
    gen_b: usize,
}

impl GroupTable {
    pub fn elements(&self) -> &[Perm16] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Perm16 {
        &self.elements[i]
    }

    /// Shortlex-minimal word for element `i`.
    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn name(&self, i: usize) -> String {
        self.words[i].to_string()
    }

    pub fn mult(&self, i: usize, j: usize) -> usize {
        self.mult[i][j]
    }

    pub fn index_of(&self, p: &Perm16) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn a(&self) -> &Perm16 {
        &self.elements[self.gen_a]
    }

    pub fn b(&self) -> &Perm16 {
        &self.elements[self.gen_b]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.mult[i]
            .iter()
            .position(|&k| k == 0)
            .expect("closed group has inverses")
    }

    /// Evaluates a word through the table's generators.
    pub fn evaluate(&self, word: &Word) -> Perm16 {
        word.evaluate(self.a(), self.b())
    }

    /// Looks up an element by a label such as `"a^3b"`.
    pub fn lookup(&self, label: &str) -> Result<usize> {
        let p = self.evaluate(&Word::parse(label)?);
        self.index_of(&p)
            .ok_or_else(|| Error::Parse(format!("{label} is not in the table")))
    }

    /// The unique element mapping cell 1 to `cell` (one-based), when the
    /// action is regular.
    pub fn element_at_cell(&self, cell: usize) -> Option<usize> {
        let mut hits = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, p)| p.image_of(1) == cell)
            .map(|(i, _)| i);
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }

    /// True when every cell is hit from cell 1 by exactly one element.
    pub fn acts_regularly(&self) -> bool {
        self.len() == CELLS && (1..=CELLS).all(|c| self.element_at_cell(c).is_some())
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.mult[i][j] == self.mult[j][i]))
    }
}

/// Closure of `{a, b}` under composition, with shortlex element names.
///
/// Fails if the closure grows past sixteen elements.
pub fn generate_group(a: &Perm16, b: &Perm16) -> Result<GroupTable> {
    let id = Perm16::identity();
    let mut elements = vec![id];
    let mut words = vec![Word(String::new())];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    // BFS with letters appended in order a < b yields shortlex-minimal words.
    while let Some(i) = queue.pop_front() {
        for (letter, g) in [('a', a), ('b', b)] {
            let next = compose(&elements[i], g);
            if index.contains_key(&next) {
                continue;
            }
            if elements.len() == CELLS {
                return Err(Error::GroupClosure(format!(
                    "closure exceeds {CELLS} elements"
                )));
            }
            let mut w = words[i].0.clone();
            w.push(letter);
            index.insert(next, elements.len());
            elements.push(next);
            words.push(Word(w));
            queue.push_back(elements.len() - 1);
        }
    }
    let mult = elements
        .iter()
        .map(|p| elements.iter().map(|q| index[&compose(p, q)]).collect())
        .collect();
    let gen_a = index[a];
    let gen_b = index[b];
    Ok(GroupTable {
        elements,
        words,
        mult,
        index,
        gen_a,
        gen_b,
    })
}

/// The sixteen-element group generated by the printed `a` and `b`.
pub fn q8_group() -> Result<GroupTable> {
    let (a, b) = generators_from_paper();
    let table = generate_group(&a, &b)?;
    if table.len() != CELLS {
        return Err(Error::GroupClosure(format!(
            "closure has {} elements, expected {CELLS}",
            table.len()
        )));
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relations: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
    }
}

/// Checks the defining relations `a^8 = e`, `a^4 = b^2`, `b^2 = abab`,
/// `aba = b` and `b^4 = e` on the table's generators.
pub fn verify_presentation(table: &GroupTable) -> RelationReport {
    let a = table.a();
    let b = table.b();
    let id = Perm16::identity();
    let ab = compose(a, b);
    let checks = [
        ("a^8 = e", a.pow(8) == id),
        ("a^4 = b^2", a.pow(4) == b.pow(2)),
        ("b^2 = abab", b.pow(2) == compose(&ab, &ab)),
        ("aba = b", compose(a, &compose(b, a)) == *b),
        ("b^4 = e", b.pow(4) == id),
    ];
    RelationReport {
        relations: checks
            .into_iter()
            .map(|(name, holds)| RelationCheck {
                name: name.to_string(),
                holds,
            })
            .collect(),
    }
}

/// The sixteen printed rows of the element list, label then cycles.
pub const PRINTED_ELEMENTS: [(&str, &str); 16] = [
    ("Id", ""),
    ("a", "(1 2 3 4 9 10 11 12)(5 16 15 14 13 8 7 6)"),
    ("b", "(1 5 9 13)(2 6 10 14)(3 7 11 15)(4 8 12 16)"),
    ("ab", "(1 16 9 8)(2 5 10 13)(3 6 11 14)(4 7 12 15)"),
    ("b^2", "(1 9)(2 10)(2 11)(4 12)(5 13)(6 14)(7 15)(8 16)"),
    ("a^2", "(1 3 9 11)(2 4 10 12)(5 15 13 7)(6 16 14 8)"),
    ("a^3", "(1 4 11 2 9 12 3 10)(5 14 7 16 13 6 15 8)"),
    ("ab^2", "(1 10 3 12 9 2 11 4)(5 8 15 6 13 16 7 4)"),
    ("a^2b^2", "(1 11 9 3)(2 12 10 4)(5 7 13 15)(6 8 14 16)"),
    ("a^3b^2", "(1 12 11 10 9 4 3 2)(5 6 7 8 13 14 15 16)"),
    ("ba", "(1 6 9 14)(2 7 10 15)(3 8 11 16)(4 13 12 15)"),
    ("ba^2", "(1 7 9 15)(2 8 10 16)(3 13 11 5)(4 14 12 16)"),
    ("b^3", "(1 13 9 5)(2 14)(3 15 11 7)(4 16 12 8)(6 10)"),
    ("ab^3", "(1 8 9 16)(2 13 10 5)(3 4 15 14)(6 11 12 7)"),
    ("a^3b", "(1 14 9 6)(2 15 10 7)(3 16 11 8)(4 5 12 13)"),
    ("a^2b", "(1 15 9 7)(2 16 10 8)(3 5 11 13)(4 6 12 14)"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    Malformed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementAuditRow {
    pub label: String,
    pub printed: String,
    pub verdict: Verdict,
    /// Cycle notation of the element the label denotes.
    pub corrected_cycles: String,
    /// Shortlex name of that element in the generated table.
    pub table_name: String,
    pub note: Option<String>,
}

/// Recomputes every printed element from its label and compares it with the
/// printed cycle notation.
pub fn audit_eq1(table: &GroupTable) -> Vec<ElementAuditRow> {
    PRINTED_ELEMENTS
        .iter()
        .map(|&(label, printed)| audit_row(table, label, printed))
        .collect()
}

fn audit_row(table: &GroupTable, label: &str, printed: &str) -> ElementAuditRow {
    let expected = Word::parse(label).map(|w| table.evaluate(&w));
    let (corrected_cycles, table_name) = match &expected {
        Ok(p) => (
            p.cycle_notation(),
            table.index_of(p).map(|i| table.name(i)).unwrap_or_default(),
        ),
        Err(_) => (String::new(), String::new()),
    };
    let (verdict, note) = match (&expected, parse_cycle_lists(printed)) {
        (Err(e), _) => (Verdict::Malformed, Some(format!("label: {e}"))),
        (_, Err(e)) => (Verdict::Malformed, Some(e.to_string())),
        (Ok(p), Ok(lists)) => match Perm16::from_cycles(&lists) {
            Err(e) => (Verdict::Malformed, Some(e.to_string())),
            Ok(q) if q == *p => (Verdict::Match, None),
            Ok(q) => {
                let note = match table.index_of(&q) {
                    Some(i) => format!("printed cycles are the element {}", table.name(i)),
                    None => "printed cycles are not a group element".to_string(),
                };
                (Verdict::Mismatch, Some(note))
            }
        },
    };
    ElementAuditRow {
        label: label.to_string(),
        printed: printed.to_string(),
        verdict,
        corrected_cycles,
        table_name,
        note,
    }
}

/// Directed Cayley graph on the cells.
///
/// Cell `i` stands for the unique group element `γ_i` with `γ_i(1) = i`.
/// Generator edges join `γ` to `γ·s`, so every cell permutation in the group
/// (left multiplication) is a graph automorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CayleyGraph {
    a_succ: Perm16,
    b_succ: Perm16,
}

impl CayleyGraph {
    /// Builds the graph; the group must act regularly on the cells.
    pub fn from_table(table: &GroupTable) -> Result<Self> {
        if !table.acts_regularly() {
            return Err(Error::GroupClosure(
                "group does not act regularly on the cells".into(),
            ));
        }
        let succ = |g: &Perm16| {
            let target = g.image_of(1);
            let mut images = [0usize; CELLS];
            for (cell, img) in images.iter_mut().enumerate() {
                let gamma = table.element(table.element_at_cell(cell + 1).expect("regular"));
                *img = gamma.apply(target - 1);
            }
            Perm16::from_images(images).expect("regular action gives a bijection")
        };
        Ok(Self {
            a_succ: succ(table.a()),
            b_succ: succ(table.b()),
        })
    }

    /// Graph whose edges are the generator permutations themselves
    /// (`i → a(i)`). Its automorphisms are the right translations, not the
    /// cell permutations of the table.
    pub fn left_translation_edges(table: &GroupTable) -> Self {
        Self {
            a_succ: *table.a(),
            b_succ: *table.b(),
        }
    }

    /// Relabels the nodes by `sigma`.
    pub fn relabel(&self, sigma: &Perm16) -> Self {
        let conj = |p: &Perm16| compose(sigma, &compose(p, &sigma.inverse()));
        Self {
            a_succ: conj(&self.a_succ),
            b_succ: conj(&self.b_succ),
        }
    }

    pub fn a_successor(&self) -> &Perm16 {
        &self.a_succ
    }

    pub fn b_successor(&self) -> &Perm16 {
        &self.b_succ
    }

    /// One-based `(from, to)` pairs for the a-edges.
    pub fn a_edges(&self) -> Vec<(usize, usize)> {
        (1..=CELLS).map(|c| (c, self.a_succ.image_of(c))).collect()
    }

    pub fn b_edges(&self) -> Vec<(usize, usize)> {
        (1..=CELLS).map(|c| (c, self.b_succ.image_of(c))).collect()
    }

    /// True when `p` maps a-edges to a-edges and b-edges to b-edges.
    pub fn is_automorphism(&self, p: &Perm16) -> bool {
        compose(p, &self.a_succ) == compose(&self.a_succ, p)
            && compose(p, &self.b_succ) == compose(&self.b_succ, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> GroupTable {
        q8_group().unwrap()
    }

    #[test]
    fn printed_generators() {
        let (a, b) = generators_from_paper();
        assert_eq!(a.image_of(1), 2);
        assert_eq!(b.image_of(1), 5);
        assert!(a.pow(8).is_identity());
        for c in 1..=CELLS {
            assert_eq!(a.pow(8).image_of(c), c);
        }
    }

    #[test]
    fn compose_laws() {
        let (a, b) = generators_from_paper();
        assert!(compose(&a, &a.inverse()).is_identity());
        assert_eq!(compose(&Perm16::identity(), &b), b);
        assert_eq!(compose(&a, &compose(&b, &a)), b);
    }

    #[test]
    fn generate_q8_group() {
        let t = table();
        assert_eq!(t.len(), 16);
        assert_eq!(t.lookup("a^4").unwrap(), t.lookup("b^2").unwrap());
        assert!(!t.is_abelian());
        assert!(t.acts_regularly());
    }

    #[test]
    fn trivial_group() {
        let id = Perm16::identity();
        let t = generate_group(&id, &id).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn closure_overflow_is_an_error() {
        let a = Perm16::from_cycles(&[vec![1, 2]]).unwrap();
        let b = Perm16::from_cycles(&[(1..=16).collect::<Vec<_>>()]).unwrap();
        assert!(matches!(
            generate_group(&a, &b),
            Err(Error::GroupClosure(_))
        ));
    }

    #[test]
    fn presentation_holds_for_printed_generators() {
        let report = verify_presentation(&table());
        assert!(report.all_hold(), "{report:?}");
        assert!(report
            .relations
            .iter()
            .any(|r| r.name == "b^4 = e" && r.holds));
    }

    #[test]
    fn cyclic_group_fails_aba() {
        let a = Perm16::from_cycles(&[(1..=16).collect::<Vec<_>>()]).unwrap();
        let t = generate_group(&a, &Perm16::identity()).unwrap();
        assert_eq!(t.len(), 16);
        let report = verify_presentation(&t);
        let aba = report
            .relations
            .iter()
            .find(|r| r.name == "aba = b")
            .unwrap();
        assert!(!aba.holds);
    }

    #[test]
    fn shortlex_names() {
        let t = table();
        assert_eq!(t.name(0), "e");
        assert_eq!(t.name(t.lookup("a").unwrap()), "a");
        assert_eq!(t.name(t.lookup("b").unwrap()), "b");
        // a^4 = b^2; b^2 is shorter
        assert_eq!(t.name(t.lookup("a^4").unwrap()), "b^2");
        for i in 0..t.len() {
            assert_eq!(t.evaluate(t.word(i)), *t.element(i));
            assert!(t.word(i).len() <= 5);
        }
    }

    #[test]
    fn group_axioms_exhaustive() {
        let t = table();
        let n = t.len();
        for i in 0..n {
            assert_eq!(t.mult(0, i), i);
            assert_eq!(t.mult(i, 0), i);
            let inv = t.inverse_index(i);
            assert_eq!(t.mult(inv, i), 0);
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(t.mult(t.mult(i, j), k), t.mult(i, t.mult(j, k)));
                }
            }
        }
    }

    #[test]
    fn word_parsing_and_display() {
        assert_eq!(Word::parse("a^3b^2").unwrap().0, "aaabb");
        assert_eq!(Word::parse("Id").unwrap().0, "");
        assert_eq!(Word("aaabb".into()).to_string(), "a^3b^2");
        assert!(Word::parse("c").is_err());
    }

    #[test]
    fn cycle_parsing_rejects_repeats() {
        assert!(Perm16::parse_cycles("(1 9)(2 10)(2 11)").is_err());
        let p = Perm16::parse_cycles("(1 2 3)(4 5)").unwrap();
        assert_eq!(p.cycle_notation(), "(1 2 3)(4 5)");
        assert!(Perm16::parse_cycles("(1 17)").is_err());
        assert!(Perm16::parse_cycles("(1 2").is_err());
    }

    #[test]
    fn element_audit_verdicts() {
        let rows = audit_eq1(&table());
        assert_eq!(rows.len(), 16);
        let by = |l: &str| rows.iter().find(|r| r.label == l).unwrap();
        assert_eq!(by("a").verdict, Verdict::Match);
        assert_eq!(by("b").verdict, Verdict::Match);
        assert_eq!(by("Id").verdict, Verdict::Match);
        assert_eq!(by("b^2").verdict, Verdict::Malformed);
        let a2 = by("a^2");
        let (a, _) = generators_from_paper();
        assert_eq!(a2.corrected_cycles, a.pow(2).cycle_notation());
        assert_eq!(rows, audit_eq1(&table()));
    }

    #[test]
    fn cayley_graph_structure() {
        let t = table();
        let g = CayleyGraph::from_table(&t).unwrap();
        assert!(g.a_successor().pow(8).is_identity());
        assert!(g.b_successor().pow(4).is_identity());
        for e in t.elements() {
            assert!(g.is_automorphism(e));
        }
        // cell 1 is the identity: its a-predecessor is the cell of a^{-1}
        assert_eq!(g.a_successor().inverse().image_of(1), 12);
        assert_eq!(g.b_successor().image_of(1), 5);
        let edges = g.a_edges();
        let mut indeg = [0; CELLS];
        for (_, to) in &edges {
            indeg[to - 1] += 1;
        }
        assert!(indeg.iter().all(|&d| d == 1));
    }

    #[test]
    fn left_translation_graph_is_not_invariant_under_the_table() {
        let t = table();
        let g = CayleyGraph::left_translation_edges(&t);
        assert!(!t.elements().iter().all(|e| g.is_automorphism(e)));
    }

    #[test]
    fn left_multiplication_is_regular() {
        let t = table();
        for i in 0..t.len() {
            // left multiplication by element i, read on cells, is element i
            let mut images = [0usize; CELLS];
            for (cell, img) in images.iter_mut().enumerate() {
                let j = t.element_at_cell(cell + 1).unwrap();
                *img = t.element(t.mult(i, j)).apply(0);
            }
            assert_eq!(Perm16::from_images(images).unwrap(), *t.element(i));
        }
    }
}
