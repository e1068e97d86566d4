//! Pratt parser for the infix expression grammar.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary minus, `^` (right
//! associative). Function application is `name(expr)`.

use std::fmt;

use super::{Expr, Func, Number};

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
    pub unknown_function: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.unknown_function {
            return write!(f, "{}:{}: unknown function `{}`", self.line, self.column, name);
        }
        write!(f, "{}:{}: expected {}, found {}", self.line, self.column, self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Number),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut exact = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                exact = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    exact = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let num = match (exact, text.parse::<i64>()) {
                (true, Ok(n)) => Number::int(n),
                _ => Number::float(text.parse::<f64>().map_err(|_| ParseError {
                    line,
                    column: start_col,
                    expected: vec!["number".into()],
                    found: format!("`{text}`"),
                    unknown_function: None,
                })?),
            };
            col += i - start;
            out.push(Spanned { tok: Tok::Num(num), line, column: start_col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line, column: start_col });
            continue;
        }
        if "+-*/^()".contains(c) {
            i += 1;
            col += 1;
            out.push(Spanned { tok: Tok::Op(c), line, column: start_col });
            continue;
        }
        return Err(ParseError {
            line,
            column: col,
            expected: vec!["expression".into()],
            found: format!("`{c}`"),
            unknown_function: None,
        });
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
            unknown_function: None,
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Op(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&format!("`{op}`")]))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op(c) if "+-*/^".contains(c) => c,
                Tok::Op(')') | Tok::End => break,
                _ => return Err(self.error(&["operator", "`)`", "end of input"])),
            };
            let (lbp, rbp) = match op {
                '+' | '-' => (1, 2),
                '*' | '/' => (3, 4),
                _ => (7, 6),
            };
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(rbp)?;
            lhs = match op {
                '+' => lhs + rhs,
                '-' => lhs - rhs,
                '*' => lhs * rhs,
                '/' => lhs / rhs,
                _ => Expr::pow(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let here = self.peek();
        let (line, column) = (here.line, here.column);
        match here.tok.clone() {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::num(n))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek().tok == Tok::Op('(') {
                    let func = match name.as_str() {
                        "sqrt" => None,
                        other => Some(Func::from_name(other).ok_or_else(|| ParseError {
                            line,
                            column,
                            expected: vec!["function name".into()],
                            found: format!("identifier `{name}`"),
                            unknown_function: Some(name.clone()),
                        })?),
                    };
                    self.pos += 1;
                    let arg = self.expr(0)?;
                    self.expect(')')?;
                    return Ok(match func {
                        Some(f) => Expr::call(f, arg),
                        None => Expr::sqrt(arg),
                    });
                }
                if self.params.contains(&name.as_str()) {
                    Ok(Expr::param(&name))
                } else {
                    Ok(Expr::var(&name))
                }
            }
            Tok::Op('(') => {
                self.pos += 1;
                let inner = self.expr(0)?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op('-') => {
                self.pos += 1;
                Ok(-self.expr(5)?)
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }
}

/// Parses `src` treating every identifier as a variable.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with_params(src, &[])
}

/// Parses `src`, marking the listed identifiers as parameters.
pub fn parse_with_params(src: &str, params: &[&str]) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, params };
    let e = p.expr(0)?;
    if p.peek().tok != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap(), -(Expr::var("x").powi(2)));
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("1 - 2 - 3").unwrap(), Expr::int(-4));
        assert_eq!(parse("8/2/2").unwrap(), Expr::int(2));
        assert_eq!(parse("2^-1").unwrap(), Expr::rational(1, 2));
    }

    #[test]
    fn literals() {
        assert_eq!(parse("1.5e3").unwrap(), Expr::int(1500));
        assert_eq!(parse("2.50").unwrap(), Expr::float(2.5));
        assert_eq!(parse(".5").unwrap(), Expr::float(0.5));
        assert!(parse("3e").is_err());
    }

    #[test]
    fn sqrt_is_half_power() {
        assert_eq!(parse("sqrt(x)").unwrap(), parse("x^(1/2)").unwrap());
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("x +\n  * 2").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.expected.iter().any(|s| s == "identifier"));

        let err = parse("foo(x)").unwrap_err();
        assert_eq!(err.unknown_function.as_deref(), Some("foo"));

        let err = parse("(x + 1").unwrap_err();
        assert!(err.found.contains("end of input"));
        assert!(parse("x y").is_err());
    }

    #[test]
    fn params_are_marked() {
        let e = parse_with_params("k*x", &["k"]).unwrap();
        assert!(e.parameters().contains("k"));
        assert!(!e.variables().contains("k"));
    }
}
