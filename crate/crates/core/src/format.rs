//! Plain-text ring and module files.
//!
//! ```text
//! # comments run to the end of the line
//! ring
//!   p 3
//!   additive 1 1          # exponents: Z/p^e for each generator
//!   one 1 0
//!   product 1 1 0 0       # e_a * e_b = coordinates; omitted products are 0
//! end
//! module
//!   additive 1
//!   image 0 0 1           # e_a acting on generator u_j = coordinates; omitted images are 0
//! end
//! ```
//!
//! Every data token is a non-negative integer. A file holds at most one `ring` block and any
//! number of `module` blocks; modules are read over the ring given alongside them.
//! `write_*` emits the canonical form that `parse` reads back token for token.

use std::sync::Arc;

use crate::algebra::{FiniteAlgebra, RModule};
use crate::error::{Error, Result};
use crate::linalg::{Elem, GrpMap, PGroup};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Token {
    text: String,
    line: usize,
    col: usize,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Lines of tokens, comments dropped, blank lines skipped; positions are 1-based.
fn tokenize(text: &str) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    let col = body[..s].chars().count() + 1;
                    toks.push(Token { text: body[s..i].to_string(), line: ln + 1, col });
                    start = None;
                }
                _ => {}
            }
        }
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    out
}

fn int(t: &Token) -> Result<u64> {
    t.text.parse().map_err(|_| parse_err(t.line, t.col, format!("expected a non-negative integer, found {:?}", t.text)))
}

fn ints(ts: &[Token]) -> Result<Vec<u64>> {
    ts.iter().map(int).collect()
}

fn index(t: &Token, bound: usize, what: &str) -> Result<usize> {
    let v = int(t)? as usize;
    if v >= bound {
        return Err(parse_err(t.line, t.col, format!("{what} {v} out of range (< {bound})")));
    }
    Ok(v)
}

fn exps_of(head: &Token, ts: &[Token]) -> Result<Vec<u32>> {
    ts.iter()
        .map(|t| {
            let e = int(t)?;
            if e == 0 || e > 32 {
                Err(parse_err(t.line, t.col, "exponents must lie in 1..=32"))
            } else {
                Ok(e as u32)
            }
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Parse { .. } => e,
            _ => parse_err(head.line, head.col, "bad exponent list"),
        })
}

fn coords(ts: &[Token], g: &PGroup, head: &Token) -> Result<Elem> {
    if ts.len() != g.rank() {
        return Err(parse_err(head.line, head.col, format!("expected {} coordinates, found {}", g.rank(), ts.len())));
    }
    let v = ints(ts)?;
    for (j, (&x, t)) in v.iter().zip(ts).enumerate() {
        if x >= g.modulus(j) {
            return Err(parse_err(t.line, t.col, format!("coordinate {x} not reduced modulo {}", g.modulus(j))));
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, Default)]
struct Blocks {
    ring: Option<(Token, Vec<Vec<Token>>)>,
    modules: Vec<(Token, Vec<Vec<Token>>)>,
}

fn blocks(text: &str) -> Result<Blocks> {
    let mut out = Blocks::default();
    let mut lines = tokenize(text).into_iter();
    while let Some(line) = lines.next() {
        let head = line[0].clone();
        if line.len() > 1 {
            return Err(parse_err(line[1].line, line[1].col, format!("unexpected token after {:?}", head.text)));
        }
        let mut body = Vec::new();
        let mut closed = false;
        for l in lines.by_ref() {
            if l[0].text == "end" {
                if l.len() > 1 {
                    return Err(parse_err(l[1].line, l[1].col, "unexpected token after end"));
                }
                closed = true;
                break;
            }
            body.push(l);
        }
        if !closed {
            return Err(parse_err(head.line, head.col, format!("{} block is not closed by end", head.text)));
        }
        match head.text.as_str() {
            "ring" if out.ring.is_none() => out.ring = Some((head, body)),
            "ring" => return Err(parse_err(head.line, head.col, "second ring block")),
            "module" => out.modules.push((head, body)),
            other => return Err(parse_err(head.line, head.col, format!("expected ring or module, found {other:?}"))),
        }
    }
    Ok(out)
}

fn build_ring(head: &Token, body: &[Vec<Token>]) -> Result<FiniteAlgebra> {
    let mut p = None;
    let mut add: Option<PGroup> = None;
    let mut one = None;
    let mut products: Vec<(Token, usize, usize, Elem)> = Vec::new();
    for l in body {
        let k = &l[0];
        match k.text.as_str() {
            "p" => {
                if l.len() != 2 {
                    return Err(parse_err(k.line, k.col, "p takes one integer"));
                }
                let v = int(&l[1])?;
                if !crate::linalg::is_prime(v) {
                    return Err(parse_err(l[1].line, l[1].col, format!("{v} is not prime")));
                }
                p = Some(v);
            }
            "additive" => {
                let p = p.ok_or_else(|| parse_err(k.line, k.col, "additive before p"))?;
                add = Some(PGroup::new(p, exps_of(k, &l[1..])?)?);
            }
            "one" => {
                let g = add.as_ref().ok_or_else(|| parse_err(k.line, k.col, "one before additive"))?;
                one = Some(coords(&l[1..], g, k)?);
            }
            "product" => {
                let g = add.as_ref().ok_or_else(|| parse_err(k.line, k.col, "product before additive"))?;
                if l.len() < 3 {
                    return Err(parse_err(k.line, k.col, "product needs two indices"));
                }
                let a = index(&l[1], g.rank(), "generator")?;
                let b = index(&l[2], g.rank(), "generator")?;
                if products.iter().any(|(_, x, y, _)| (*x, *y) == (a, b)) {
                    return Err(parse_err(k.line, k.col, format!("product {a} {b} given twice")));
                }
                products.push((k.clone(), a, b, coords(&l[3..], g, k)?));
            }
            other => return Err(parse_err(k.line, k.col, format!("unknown ring keyword {other:?}"))),
        }
    }
    let add = add.ok_or_else(|| parse_err(head.line, head.col, "ring without additive line"))?;
    let one = one.ok_or_else(|| parse_err(head.line, head.col, "ring without one line"))?;
    let n = add.rank();
    let mut table = vec![vec![add.zero(); n]; n];
    for (_, a, b, c) in products {
        table[a][b] = c;
    }
    FiniteAlgebra::new(add, table, one).map_err(|e| parse_err(head.line, head.col, e.to_string()))
}

fn build_module(ring: &Arc<FiniteAlgebra>, head: &Token, body: &[Vec<Token>]) -> Result<RModule> {
    let mut add: Option<PGroup> = None;
    let mut images: Vec<(usize, usize, Elem)> = Vec::new();
    for l in body {
        let k = &l[0];
        match k.text.as_str() {
            "additive" => add = Some(PGroup::new(ring.p(), exps_of(k, &l[1..])?)?),
            "image" => {
                let g = add.as_ref().ok_or_else(|| parse_err(k.line, k.col, "image before additive"))?;
                if l.len() < 3 {
                    return Err(parse_err(k.line, k.col, "image needs a ring generator and a module generator"));
                }
                let a = index(&l[1], ring.dim(), "ring generator")?;
                let j = index(&l[2], g.rank(), "module generator")?;
                if images.iter().any(|(x, y, _)| (*x, *y) == (a, j)) {
                    return Err(parse_err(k.line, k.col, format!("image {a} {j} given twice")));
                }
                images.push((a, j, coords(&l[3..], g, k)?));
            }
            other => return Err(parse_err(k.line, k.col, format!("unknown module keyword {other:?}"))),
        }
    }
    let add = add.ok_or_else(|| parse_err(head.line, head.col, "module without additive line"))?;
    let mut cols = vec![vec![add.zero(); add.rank()]; ring.dim()];
    for (a, j, c) in images {
        cols[a][j] = c;
    }
    let action = cols
        .iter()
        .map(|c| GrpMap::from_images(add.clone(), add.clone(), c))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| parse_err(head.line, head.col, e.to_string()))?;
    RModule::new(ring.clone(), add, action).map_err(|e| parse_err(head.line, head.col, e.to_string()))
}

/// The single `ring` block of a file; module blocks in the same file are ignored.
pub fn parse_ring(text: &str) -> Result<Arc<FiniteAlgebra>> {
    let b = blocks(text)?;
    let (head, body) = b.ring.ok_or_else(|| parse_err(1, 1, "no ring block"))?;
    Ok(Arc::new(build_ring(&head, &body)?))
}

/// All `module` blocks of a file, over `ring`.
pub fn parse_modules(ring: &Arc<FiniteAlgebra>, text: &str) -> Result<Vec<RModule>> {
    let b = blocks(text)?;
    if b.modules.is_empty() {
        return Err(parse_err(1, 1, "no module block"));
    }
    b.modules.iter().map(|(h, body)| build_module(ring, h, body)).collect()
}

fn line(out: &mut String, indent: bool, words: impl IntoIterator<Item = String>) {
    if indent {
        out.push_str("  ");
    }
    out.push_str(&words.into_iter().collect::<Vec<_>>().join(" "));
    out.push('\n');
}

fn nums(v: &[u64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| x.to_string())
}

pub fn write_ring(r: &FiniteAlgebra) -> String {
    let mut s = String::new();
    line(&mut s, false, ["ring".to_string()]);
    line(&mut s, true, ["p".to_string(), r.p().to_string()]);
    line(&mut s, true, std::iter::once("additive".to_string()).chain(r.add.exps.iter().map(|e| e.to_string())));
    line(&mut s, true, std::iter::once("one".to_string()).chain(nums(&r.one)));
    for (a, row) in r.table.iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            if !r.add.is_zero(c) {
                line(&mut s, true, ["product".to_string(), a.to_string(), b.to_string()].into_iter().chain(nums(c)));
            }
        }
    }
    line(&mut s, false, ["end".to_string()]);
    s
}

pub fn write_module(m: &RModule) -> String {
    let mut s = String::new();
    line(&mut s, false, ["module".to_string()]);
    line(&mut s, true, std::iter::once("additive".to_string()).chain(m.add.exps.iter().map(|e| e.to_string())));
    for (a, rho) in m.action.iter().enumerate() {
        for j in 0..m.add.rank() {
            let c = rho.column(j);
            if !m.add.is_zero(&c) {
                line(&mut s, true, ["image".to_string(), a.to_string(), j.to_string()].into_iter().chain(nums(&c)));
            }
        }
    }
    line(&mut s, false, ["end".to_string()]);
    s
}

/// Token sequence with comments and layout removed; round-trips compare these.
pub fn normalized(text: &str) -> Vec<String> {
    tokenize(text).into_iter().flatten().map(|t| t.text).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_round_trip() {
        for name in fixtures::instance_names() {
            let inst = fixtures::instance_by_name(name).unwrap();
            let ring = inst.ctx.modules[0].ring.clone();
            let text = write_ring(&ring);
            let back = parse_ring(&text).unwrap();
            assert_eq!(*back, *ring, "{name}");
            assert_eq!(normalized(&write_ring(&back)), normalized(&text));
            let mods: String = inst.ctx.modules.iter().map(write_module).collect();
            let parsed = parse_modules(&back, &mods).unwrap();
            assert_eq!(parsed.len(), inst.ctx.len());
            for (a, b) in parsed.iter().zip(&inst.ctx.modules) {
                assert_eq!(a.add, b.add);
                assert_eq!(a.action, b.action);
            }
            assert_eq!(normalized(&parsed.iter().map(write_module).collect::<String>()), normalized(&mods));
        }
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            ("ring\n  p 4\nend\n", (2, 5)),
            ("ring\n  p 2\n  additive 1\n  one x\nend\n", (4, 7)),
            ("ring\n  p 2\n  additive 1\n  one 1\n", (1, 1)),
            ("ring\n  p 2\n  additive 1\n  one 1\n  product 0 3 1\nend\n", (5, 13)),
            ("ring\n  p 2\n  additive 1 1\n  one 1 0\n  frob 1\nend\n", (5, 3)),
            ("ring\n  p 2\n  additive 1\n  one 2\nend\n", (4, 7)),
        ];
        for (text, pos) in cases {
            match parse_ring(text) {
                Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), pos, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        // Structurally valid but not an algebra: reported at the block head.
        let bad = "ring\n  p 2\n  additive 1 1\n  one 1 0\nend\n";
        assert!(matches!(parse_ring(bad), Err(Error::Parse { line: 1, col: 1, .. })));
        let ring = parse_ring("ring\n  p 2\n  additive 1\n  one 1\n  product 0 0 1\nend\n").unwrap();
        let m = "module\n  additive 1\nend\n";
        assert!(matches!(parse_modules(&ring, m), Err(Error::Parse { line: 1, .. })));
        let ok = "# F_2 as a module\nmodule\n  additive 1\n  image 0 0 1  # unit\nend\n";
        assert_eq!(parse_modules(&ring, ok).unwrap()[0].add.exps, vec![1]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn fixture_text() -> impl Strategy<Value = (String, String)> {
            prop::sample::select(fixtures::instance_names()).prop_map(|name| {
                let inst = fixtures::instance_by_name(name).unwrap();
                let m = inst.block().unwrap().module;
                (write_ring(&m.ring), write_module(&m))
            })
        }

        /// Re-spaces `text`, adding blank lines and trailing comments; the token stream is unchanged.
        fn respace(text: &str, seed: &[u8]) -> String {
            let mut out = String::new();
            for (k, line) in text.lines().enumerate() {
                let b = seed.get(k % seed.len().max(1)).copied().unwrap_or(0);
                out += &" ".repeat((b % 4) as usize);
                out += &line.split_whitespace().collect::<Vec<_>>().join(&" ".repeat(1 + (b as usize >> 2) % 3));
                if b & 1 == 1 {
                    out += "  # note";
                }
                out += "\n";
                if b % 5 == 0 {
                    out += "\n# spacer\n";
                }
            }
            out
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn layout_does_not_change_the_parse((ring, module) in fixture_text(), seed in prop::collection::vec(any::<u8>(), 1..8)) {
                let r = parse_ring(&ring).unwrap();
                let r2 = parse_ring(&respace(&ring, &seed)).unwrap();
                prop_assert_eq!(&*r, &*r2);
                let m = parse_modules(&r, &module).unwrap();
                let m2 = parse_modules(&r, &respace(&module, &seed)).unwrap();
                prop_assert_eq!(m.len(), m2.len());
                for (a, b) in m.iter().zip(&m2) {
                    prop_assert_eq!(&a.action, &b.action);
                }
            }

            #[test]
            fn garbage_is_rejected_with_a_position(text in "[a-z0-9 #\n]{0,80}") {
                match parse_ring(&text) {
                    Ok(_) => {}
                    Err(Error::Parse { line, col, .. }) => {
                        prop_assert!(line >= 1 && col >= 1);
                        prop_assert!(line <= text.lines().count().max(1) + 1);
                    }
                    Err(e) => prop_assert!(false, "non-parse error {e}"),
                }
            }

            #[test]
            fn truncation_never_panics((ring, module) in fixture_text(), cut in 0usize..400) {
                let r = parse_ring(&ring).unwrap();
                let cut = cut.min(module.len());
                let _ = parse_modules(&r, &module[..cut]);
                let cut = cut.min(ring.len());
                let _ = parse_ring(&ring[..cut]);
            }
        }
    }
}
