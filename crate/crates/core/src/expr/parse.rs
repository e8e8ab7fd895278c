use super::{BinaryOp, Dims, Expr, ExprError, ExprErrorKind, Node, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn err(kind: ExprErrorKind, col: usize) -> ExprError {
    ExprError { kind, col }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| err(ExprErrorKind::UnexpectedToken(text.clone()), col))?;
            out.push((Tok::Num(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(err(ExprErrorKind::UnexpectedToken(c.to_string()), col));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    dims: Dims,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let col = self.col();
            let op = if self.eat('+') {
                BinaryOp::Add
            } else if self.eat('-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr {
                node: Node::Binary(op, Box::new(lhs), Box::new(rhs)),
                col,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let col = self.col();
            let op = if self.eat('*') {
                BinaryOp::Mul
            } else if self.eat('/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr {
                node: Node::Binary(op, Box::new(lhs), Box::new(rhs)),
                col,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr {
                node: Node::Unary(UnaryOp::Neg, Box::new(inner)),
                col,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        let col = self.col();
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr {
                node: Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)),
                col,
            });
        }
        Ok(base)
    }

    fn variable(&self, name: &str) -> Option<Var> {
        if name == "t" && self.dims.time {
            return Some(Var::T);
        }
        let (head, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        match head {
            "x" if k <= self.dims.n => Some(Var::X(k - 1)),
            "u" if k <= self.dims.m => Some(Var::U(k - 1)),
            _ => None,
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return Err(err(ExprErrorKind::UnexpectedEnd, col));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr {
                node: Node::Const(v),
                col,
            }),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(err(ExprErrorKind::UnbalancedParen, col));
                }
                Ok(inner)
            }
            Tok::Op(c) => Err(err(ExprErrorKind::UnexpectedToken(c.to_string()), col)),
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::function(&name) {
                    if !self.eat('(') {
                        return Err(err(ExprErrorKind::UnknownIdentifier(name), col));
                    }
                    let open = self.toks[self.pos - 1].1;
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(',') {
                                continue;
                            }
                            if self.eat(')') {
                                break;
                            }
                            return Err(err(ExprErrorKind::UnbalancedParen, open));
                        }
                    }
                    if args.len() != 1 {
                        return Err(err(
                            ExprErrorKind::Arity {
                                function: name,
                                got: args.len(),
                            },
                            col,
                        ));
                    }
                    let arg = args.pop().expect("one argument");
                    return Ok(Expr {
                        node: Node::Unary(op, Box::new(arg)),
                        col,
                    });
                }
                match self.variable(&name) {
                    Some(v) => Ok(Expr {
                        node: Node::Var(v),
                        col,
                    }),
                    None => Err(err(ExprErrorKind::UnknownIdentifier(name), col)),
                }
            }
        }
    }
}

/// Parses `src`, accepting only the variables allowed by `dims`.
pub fn parse_expression(src: &str, dims: Dims) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(err(ExprErrorKind::Empty, 1));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
        dims,
    };
    let e = p.expr()?;
    if let Some((tok, col)) = p.toks.get(p.pos) {
        let kind = match tok {
            Tok::Op(')') => ExprErrorKind::UnbalancedParen,
            Tok::Op(c) => ExprErrorKind::UnexpectedToken(c.to_string()),
            Tok::Ident(s) => ExprErrorKind::UnexpectedToken(s.clone()),
            Tok::Num(v) => ExprErrorKind::UnexpectedToken(v.to_string()),
        };
        return Err(err(kind, *col));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_identifier_message() {
        let e = parse_expression("x7", Dims::control(2, 1)).unwrap_err();
        assert_eq!(e.to_string(), "unknown identifier 'x7' at col 1");
        let e = parse_expression("1 + u2", Dims::control(2, 1)).unwrap_err();
        assert_eq!(e.col, 5);
        assert!(parse_expression("t", Dims::state(2)).is_err());
        assert!(parse_expression("x0", Dims::state(2)).is_err());
    }

    #[test]
    fn arity_and_parens() {
        let e = parse_expression("sin(x1, x2)", Dims::state(2)).unwrap_err();
        assert!(matches!(e.kind, ExprErrorKind::Arity { got: 2, .. }));
        let e = parse_expression("(x1 + 1", Dims::state(1)).unwrap_err();
        assert_eq!(e.kind, ExprErrorKind::UnbalancedParen);
        assert_eq!(e.col, 1);
        let e = parse_expression("x1 + 1)", Dims::state(1)).unwrap_err();
        assert_eq!(e.kind, ExprErrorKind::UnbalancedParen);
        assert_eq!(e.col, 7);
        let e = parse_expression("x1 +", Dims::state(1)).unwrap_err();
        assert_eq!(e.kind, ExprErrorKind::UnexpectedEnd);
        assert_eq!(
            parse_expression("  ", Dims::state(1)).unwrap_err().kind,
            ExprErrorKind::Empty
        );
    }

    #[test]
    fn numbers() {
        let e = parse_expression("1.5e-3 + .5 + 2E2", Dims::state(0)).unwrap();
        assert!((e.eval(0.0, &[], &[]).unwrap() - 200.5015).abs() < 1e-12);
    }
}
