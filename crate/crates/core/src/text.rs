//! Line-oriented text formats: presentations, words, generator maps and
//! fibre-product embeddings.
//!
//! ```text
//! # comment
//! name: S
//! gens: a t
//! rel: t a^2 t^-1 a^-3
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentation::{GenMap, Presentation};
use crate::word::{is_identifier, Alphabet, Run, Word};

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Splits on ASCII whitespace, keeping 1-based columns.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((st + 1, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st + 1, &s[st..]));
    }
    out
}

fn parse_word_at(alphabet: &Alphabet, s: &str, line: usize, col0: usize) -> Result<Word> {
    let mut runs = Vec::new();
    let toks = tokens(s);
    for &(col, tok) in &toks {
        let col = col0 + col - 1;
        if tok == "1" {
            if toks.len() > 1 {
                return Err(parse_err(line, col, "`1` must stand alone"));
            }
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((name, e)) => {
                let k: i64 = e
                    .parse()
                    .map_err(|_| parse_err(line, col + name.len() + 1, format!("bad exponent `{e}`")))?;
                if k == 0 {
                    return Err(parse_err(line, col + name.len() + 1, "zero exponent"));
                }
                (name, k)
            }
            None => (tok, 1),
        };
        if !is_identifier(name) {
            return Err(parse_err(line, col, format!("bad generator token `{tok}`")));
        }
        let g = alphabet
            .get(name)
            .ok_or_else(|| parse_err(line, col, format!("unknown generator `{name}`")))?;
        runs.push(Run::new(g, exp));
    }
    Ok(Word::from_runs(runs))
}

/// Parses a word. The result is kept verbatim (not reduced).
pub fn parse_word(alphabet: &Alphabet, s: &str) -> Result<Word> {
    parse_word_at(alphabet, s, 1, 1)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// `(content, 1-based column where content starts)` after a `key:` prefix.
fn directive<'a>(line: &'a str, key: &str) -> Option<(&'a str, usize)> {
    let trimmed = line.trim_start();
    let lead = line.len() - trimmed.len();
    let rest = trimmed.strip_prefix(key)?.strip_prefix(':')?;
    Some((rest, lead + key.len() + 2))
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut name = None;
    let mut alphabet: Option<Alphabet> = None;
    let mut rels = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some((rest, _)) = directive(line, "name") {
            name = Some(rest.trim().to_string());
        } else if let Some((rest, col)) = directive(line, "gens") {
            if alphabet.is_some() {
                return Err(parse_err(line_no, 1, "second `gens:` line"));
            }
            let mut al = Alphabet::default();
            for (c, tok) in tokens(rest) {
                al.push(tok).map_err(|e| match e {
                    Error::DuplicateGenerator(g) => {
                        parse_err(line_no, col + c - 1, format!("duplicate generator `{g}`"))
                    }
                    other => parse_err(line_no, col + c - 1, other.to_string()),
                })?;
            }
            alphabet = Some(al);
        } else if let Some((rest, col)) = directive(line, "rel") {
            let al = alphabet
                .as_ref()
                .ok_or_else(|| parse_err(line_no, 1, "`rel:` before `gens:`"))?;
            rels.push(parse_word_at(al, rest, line_no, col)?);
        } else {
            let col = line.len() - line.trim_start().len() + 1;
            return Err(parse_err(line_no, col, "expected `name:`, `gens:` or `rel:`"));
        }
    }
    let alphabet = alphabet.ok_or_else(|| parse_err(1, 1, "missing `gens:` line"))?;
    Presentation::new(name, alphabet, rels)
}

pub fn print_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    if let Some(name) = &p.name {
        out.push_str(&format!("name: {name}\n"));
    }
    out.push_str("gens:");
    for n in p.alphabet().names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    for r in p.rels() {
        out.push_str(&format!("rel: {}\n", p.format(r)));
    }
    out
}

/// Parses a map file. `resolve` turns the `from:`/`to:` references into
/// presentations (file paths or `builtin:<name>`).
pub fn parse_genmap(
    text: &str,
    resolve: impl Fn(&str) -> Result<Arc<Presentation>>,
) -> Result<GenMap> {
    let mut from = None;
    let mut to = None;
    let mut assignments: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some((rest, _)) = directive(line, "from") {
            from = Some(resolve(rest.trim())?);
        } else if let Some((rest, _)) = directive(line, "to") {
            to = Some(resolve(rest.trim())?);
        } else if let Some((lhs, rhs)) = line.split_once("->") {
            assignments.push((line_no, lhs.trim().to_string(), rhs.to_string()));
        } else {
            return Err(parse_err(line_no, 1, "expected `from:`, `to:` or `ident -> word`"));
        }
    }
    let from = from.ok_or_else(|| parse_err(1, 1, "missing `from:`"))?;
    let to = to.ok_or_else(|| parse_err(1, 1, "missing `to:`"))?;
    let mut images: Vec<Option<Word>> = vec![None; from.num_gens()];
    for (line_no, lhs, rhs) in assignments {
        let g = from
            .alphabet()
            .get(&lhs)
            .ok_or_else(|| parse_err(line_no, 1, format!("unknown domain generator `{lhs}`")))?;
        if images[g.index()].is_some() {
            return Err(parse_err(line_no, 1, format!("`{lhs}` assigned twice")));
        }
        images[g.index()] = Some(parse_word_at(to.alphabet(), &rhs, line_no, 1)?);
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.ok_or_else(|| Error::Invalid(format!("no image for `{}`", from.alphabet().names()[i])))
        })
        .collect::<Result<Vec<_>>>()?;
    GenMap::new(from, to, images)
}

pub fn print_genmap(m: &GenMap, from_ref: &str, to_ref: &str) -> String {
    let mut out = format!("from: {from_ref}\nto: {to_ref}\n");
    for (g, img) in m.domain.alphabet().gens().zip(m.images()) {
        out.push_str(&format!(
            "{} -> {}\n",
            m.domain.alphabet().name(g),
            m.codomain.format(img)
        ));
    }
    out
}

/// One line per generator: `ident -> ( first , second )`.
pub fn print_embedding(
    gens: &Alphabet,
    first: &Alphabet,
    second: &Alphabet,
    coords: &[(Word, Word)],
) -> String {
    let mut out = String::new();
    for (g, (u, v)) in gens.gens().zip(coords) {
        out.push_str(&format!(
            "{} -> ( {} , {} )\n",
            gens.name(g),
            first.format(u),
            second.format(v)
        ));
    }
    out
}

pub fn parse_embedding(
    text: &str,
    gens: &Alphabet,
    first: &Alphabet,
    second: &Alphabet,
) -> Result<Vec<(Word, Word)>> {
    let mut coords: Vec<Option<(Word, Word)>> = vec![None; gens.len()];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| parse_err(line_no, 1, "expected `ident -> ( u , v )`"))?;
        let g = gens
            .get(lhs.trim())
            .ok_or_else(|| parse_err(line_no, 1, format!("unknown generator `{}`", lhs.trim())))?;
        let inner = rhs
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| parse_err(line_no, 1, "missing parentheses"))?;
        let (u, v) = inner
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, 1, "missing `,`"))?;
        coords[g.index()] = Some((
            parse_word_at(first, u, line_no, 1)?,
            parse_word_at(second, v, line_no, 1)?,
        ));
    }
    coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::Invalid(format!("no coordinates for `{}`", gens.names()[i]))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_s() {
        let p = parse_presentation("gens: a t\nrel: t a^2 t^-1 a^-3").unwrap();
        assert_eq!(p.num_gens(), 2);
        assert_eq!(p.num_rels(), 1);
        assert_eq!(p.format(&p.rels()[0]), "t a^2 t^-1 a^-3");
    }

    #[test]
    fn free_group_rank_one() {
        let p = parse_presentation("gens: x\n").unwrap();
        assert_eq!((p.num_gens(), p.num_rels()), (1, 0));
    }

    #[test]
    fn zero_exponent_rejected() {
        let err = parse_presentation("gens: a\nrel: a^0").unwrap_err();
        match err {
            Error::Parse { line, col, msg } => {
                assert_eq!(line, 2);
                assert_eq!(col, 8);
                assert!(msg.contains("zero exponent"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_generator_rejected() {
        let err = parse_presentation("gens: a b a").unwrap_err();
        assert!(matches!(err, Error::Parse { col: 11, .. }), "{err:?}");
    }

    #[test]
    fn unknown_generator_has_position() {
        let err = parse_presentation("# S\ngens: a t\nrel: t b").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, col: 8, .. }), "{err:?}");
    }

    #[test]
    fn comments_and_identity_word() {
        let p = parse_presentation("gens: x y # two\n# nothing\nrel: 1\nrel: x y x^-1 y^-1").unwrap();
        assert_eq!(p.num_rels(), 1);
    }

    #[test]
    fn print_normalizes() {
        let p = parse_presentation("name: T\ngens: a t\nrel: a t a a^-1 a^-1").unwrap();
        assert_eq!(print_presentation(&p), "name: T\ngens: a t\nrel: t\n");
        let again = parse_presentation(&print_presentation(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn genmap_round_trip() {
        let s = Arc::new(parse_presentation("name: S\ngens: a t\nrel: t a^2 t^-1 a^-3").unwrap());
        let text = "from: s\nto: s\na -> a^2\nt -> t\n";
        let m = parse_genmap(text, |_| Ok(s.clone())).unwrap();
        assert_eq!(print_genmap(&m, "s", "s"), text);
    }

    #[test]
    fn embedding_round_trip() {
        let p = Alphabet::new(["h", "d"]).unwrap();
        let g = Alphabet::new(["x", "a"]).unwrap();
        let g2 = Alphabet::new(["y"]).unwrap();
        let coords = vec![
            (parse_word(&g, "a").unwrap(), Word::empty()),
            (parse_word(&g, "x^2").unwrap(), parse_word(&g2, "y").unwrap()),
        ];
        let text = print_embedding(&p, &g, &g2, &coords);
        assert_eq!(text, "h -> ( a , 1 )\nd -> ( x^2 , y )\n");
        assert_eq!(parse_embedding(&text, &p, &g, &g2).unwrap(), coords);
    }
}
