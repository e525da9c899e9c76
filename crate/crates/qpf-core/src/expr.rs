//! Tiny expression language for Custom families.
//!
//! Grammar: `+ - * / ^`, parentheses, functions `sin cos tan arctan exp
//! log`, variables `theta x beta`, constants `pi` and `omega` (the
//! rotation number, substituted at parse time). `^` is right
//! associative and binds tighter than unary minus.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Var {
    Theta,
    X,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Arctan,
    Exp,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parse `src`, substituting `omega` for the `omega` constant.
    pub fn parse(src: &str, omega: f64) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, omega };
        let e = p.parse_expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, theta: f64, x: f64, beta: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Theta) => theta,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Beta) => beta,
            Expr::Neg(e) => -e.eval(theta, x, beta),
            Expr::Add(a, b) => a.eval(theta, x, beta) + b.eval(theta, x, beta),
            Expr::Sub(a, b) => a.eval(theta, x, beta) - b.eval(theta, x, beta),
            Expr::Mul(a, b) => a.eval(theta, x, beta) * b.eval(theta, x, beta),
            Expr::Div(a, b) => a.eval(theta, x, beta) / b.eval(theta, x, beta),
            Expr::Pow(a, b) => math::powf(a.eval(theta, x, beta), b.eval(theta, x, beta)),
            Expr::Call(f, e) => {
                let v = e.eval(theta, x, beta);
                match f {
                    Func::Sin => math::sin(v),
                    Func::Cos => math::cos(v),
                    Func::Tan => math::tan(v),
                    Func::Arctan => math::atan(v),
                    Func::Exp => math::exp(v),
                    Func::Log => math::ln(v),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Token::Minus);
                i += c.len_utf8();
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number literal '{text}'")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(src[start..i].into()));
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    omega: f64,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            let e = self.parse_unary()?;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.pos += 1;
            // right associative; exponent may carry a unary minus
            let exp = self.parse_unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.parse_expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "theta" => Ok(Expr::Var(Var::Theta)),
                "x" => Ok(Expr::Var(Var::X)),
                "beta" => Ok(Expr::Var(Var::Beta)),
                "pi" => Ok(Expr::Num(core::f64::consts::PI)),
                "omega" => Ok(Expr::Num(self.omega)),
                "sin" | "cos" | "tan" | "arctan" | "atan" | "exp" | "log" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "tan" => Func::Tan,
                        "arctan" | "atan" => Func::Arctan,
                        "exp" => Func::Exp,
                        _ => Func::Log,
                    };
                    match self.next() {
                        Some(Token::LParen) => {}
                        _ => {
                            return Err(Error::Parse(format!(
                                "function '{name}' must be followed by '('"
                            )))
                        }
                    }
                    let arg = self.parse_expr()?;
                    match self.next() {
                        Some(Token::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                        _ => Err(Error::Parse("missing closing parenthesis".into())),
                    }
                }
                _ => Err(Error::Parse(format!("unknown identifier '{name}'"))),
            },
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_arctan_family() {
        let e = Expr::parse("arctan(100*x) - beta*(1 + cos(2*pi*theta))", 0.0).unwrap();
        let v = e.eval(0.0, 0.0, 0.78);
        assert!((v - (-1.56)).abs() < 1e-12);
    }

    #[test]
    fn precedence_and_unary() {
        let e = Expr::parse("-x^2", 0.0).unwrap();
        assert_eq!(e.eval(0.0, 3.0, 0.0), -9.0);
        let e = Expr::parse("2^-2", 0.0).unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 0.25);
        let e = Expr::parse("2^3^2", 0.0).unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 512.0);
        let e = Expr::parse("1 - 2 - 3", 0.0).unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), -4.0);
    }

    #[test]
    fn omega_constant_substitution() {
        let e = Expr::parse("cos(2*pi*(theta - omega))", 0.25).unwrap();
        assert!((e.eval(0.25, 0.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("arctan(", 0.0).is_err());
        assert!(Expr::parse("2 +* 3", 0.0).is_err());
        assert!(Expr::parse("unknown_var", 0.0).is_err());
        assert!(Expr::parse("sin 3", 0.0).is_err());
    }
}
