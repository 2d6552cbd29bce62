// SPDX-License-Identifier: Apache-2.0

//! Text predicates for the CLI and config files.
//!
//! ```text
//! predicate := "" | "true" | clause ( "AND" clause )*
//! clause    := ident op literal | ident "IS" [ "NOT" ] "NULL"
//! op        := "=" | "==" | "!=" | "<>" | "<" | "<=" | ">" | ">="
//! literal   := integer | float | 'text' | "text" | true | false
//! ```
//!
//! Keywords are case-insensitive. Integer literals compared with FLOAT64
//! columns are widened when the predicate is bound.

use crate::error::{Error, Result};
use crate::format::{Comparator, Predicate, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Str(String),
    Num(String),
    Op(Comparator),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bad = |msg: String| Error::validation(format!("predicate '{src}': {msg}"));
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\'' || c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(bad("unterminated string".into())),
                    Some('\\') if chars.get(i + 1).is_some() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&q) if q == c => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Token::Str(s));
        } else if "=!<>".contains(c) {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let (op, len) = match two.as_str() {
                "==" => (Comparator::Eq, 2),
                "!=" | "<>" => (Comparator::Ne, 2),
                "<=" => (Comparator::Le, 2),
                ">=" => (Comparator::Ge, 2),
                _ => match c {
                    '=' => (Comparator::Eq, 1),
                    '<' => (Comparator::Lt, 1),
                    '>' => (Comparator::Gt, 1),
                    _ => return Err(bad(format!("unexpected '{c}'"))),
                },
            };
            out.push(Token::Op(op));
            i += len;
        } else if c.is_ascii_digit() || ((c == '-' || c == '+' || c == '.') && i + 1 < chars.len()) {
            let start = i;
            i += 1;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '.' || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            out.push(Token::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Token::Word(chars[start..i].iter().collect()));
        } else {
            return Err(bad(format!("unexpected '{c}'")));
        }
    }
    Ok(out)
}

fn is_kw(t: Option<&Token>, kw: &str) -> bool {
    matches!(t, Some(Token::Word(w)) if w.eq_ignore_ascii_case(kw))
}

fn literal(t: &Token) -> Option<Scalar> {
    match t {
        Token::Str(s) => Some(Scalar::Utf8(s.clone())),
        Token::Word(w) if w.eq_ignore_ascii_case("true") => Some(Scalar::Bool(true)),
        Token::Word(w) if w.eq_ignore_ascii_case("false") => Some(Scalar::Bool(false)),
        Token::Num(n) => n
            .parse::<i64>()
            .map(Scalar::Int64)
            .ok()
            .or_else(|| n.parse::<f64>().ok().filter(|f| f.is_finite()).map(Scalar::Float64)),
        _ => None,
    }
}

pub fn parse_predicate(src: &str) -> Result<Predicate> {
    let tokens = tokenize(src)?;
    let bad = |msg: &str| Error::validation(format!("predicate '{src}': {msg}"));
    if tokens.is_empty() || (tokens.len() == 1 && is_kw(tokens.first(), "true")) {
        return Ok(Predicate::True);
    }
    let mut clauses = Vec::new();
    let mut i = 0;
    loop {
        let Some(Token::Word(column)) = tokens.get(i) else {
            return Err(bad("expected a column name"));
        };
        if is_kw(tokens.get(i + 1), "is") {
            let negated = is_kw(tokens.get(i + 2), "not");
            let null_at = i + 2 + negated as usize;
            if !is_kw(tokens.get(null_at), "null") {
                return Err(bad("expected NULL after IS"));
            }
            clauses.push(if negated {
                Predicate::IsNotNull(column.clone())
            } else {
                Predicate::IsNull(column.clone())
            });
            i = null_at + 1;
        } else {
            let Some(Token::Op(op)) = tokens.get(i + 1) else {
                return Err(bad("expected a comparison operator"));
            };
            let lit = tokens
                .get(i + 2)
                .and_then(literal)
                .ok_or_else(|| bad("expected a literal"))?;
            clauses.push(Predicate::compare(column.clone(), *op, lit));
            i += 3;
        }
        if i == tokens.len() {
            break;
        }
        if !is_kw(tokens.get(i), "and") {
            return Err(bad("expected AND between clauses"));
        }
        i += 1;
    }
    Ok(if clauses.len() == 1 {
        clauses.pop().unwrap()
    } else {
        Predicate::And(clauses)
    })
}
