//! Handwritten-formula evaluation over single-digit operands.

use super::{ProgramError, ProgramResult};
use crate::mapping::{SetValue, StructuralMapping};

pub const SYMBOLS: [&str; 14] = [
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "+", "-", "*", "/",
];
pub const MAX_LEN: usize = 7;

pub const PLUS: usize = 10;
pub const MINUS: usize = 11;
pub const TIMES: usize = 12;
pub const DIVIDE: usize = 13;

pub fn symbol_mapping() -> StructuralMapping {
    StructuralMapping::Discrete {
        alphabet: SYMBOLS.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn input_mapping() -> StructuralMapping {
    StructuralMapping::list(MAX_LEN, symbol_mapping())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Op(usize),
}

fn tokenize(symbols: &[usize]) -> Result<Vec<Token>, ProgramError> {
    symbols
        .iter()
        .map(|&s| match s {
            0..=9 => Ok(Token::Num(s as f64)),
            PLUS..=DIVIDE => Ok(Token::Op(s)),
            _ => Err(ProgramError::invalid_input(format!("unknown symbol index {s}"))),
        })
        .collect()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self, ops: &[usize]) -> Option<usize> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(o)) if ops.contains(o) => Some(*o),
            _ => None,
        }
    }

    fn operand(&mut self) -> Result<f64, ProgramError> {
        match self.tokens.get(self.pos) {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(*v)
            }
            Some(Token::Op(_)) => Err(ProgramError::invalid_input(format!(
                "syntax error: operator at position {}",
                self.pos
            ))),
            None => Err(ProgramError::invalid_input("syntax error: missing operand")),
        }
    }

    fn term(&mut self) -> Result<f64, ProgramError> {
        let mut acc = self.operand()?;
        while let Some(op) = self.peek_op(&[TIMES, DIVIDE]) {
            self.pos += 1;
            let rhs = self.operand()?;
            if op == TIMES {
                acc *= rhs;
            } else {
                if rhs == 0.0 {
                    return Err(ProgramError::divide_by_zero());
                }
                acc /= rhs;
            }
        }
        Ok(acc)
    }

    fn expr(&mut self) -> Result<f64, ProgramError> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek_op(&[PLUS, MINUS]) {
            self.pos += 1;
            let rhs = self.term()?;
            if op == PLUS {
                acc += rhs;
            } else {
                acc -= rhs;
            }
        }
        Ok(acc)
    }
}

/// Evaluates a formula given as symbol indices into [`SYMBOLS`].
///
/// `*` and `/` bind tighter than `+` and `-`; all operators associate to the
/// left; division is real-valued.
pub fn evaluate_symbols(symbols: &[usize]) -> Result<f64, ProgramError> {
    if symbols.is_empty() {
        return Err(ProgramError::invalid_input("syntax error: empty formula"));
    }
    let mut parser = Parser {
        tokens: tokenize(symbols)?,
        pos: 0,
    };
    let v = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ProgramError::invalid_input(format!(
            "syntax error: unexpected token at position {}",
            parser.pos
        )));
    }
    Ok(v)
}

pub(super) fn evaluate(inputs: &[SetValue]) -> ProgramResult {
    let [SetValue::List(items)] = inputs else {
        return Err(ProgramError::invalid_input("hwf expects one list input"));
    };
    let symbols = items
        .iter()
        .map(|s| s.as_discrete().ok_or_else(|| ProgramError::invalid_input("non-symbol")))
        .collect::<Result<Vec<_>, _>>()?;
    evaluate_symbols(&symbols).map(SetValue::Float)
}

/// Renders symbol indices as text, e.g. `2+3*4`.
pub fn render(symbols: &[usize]) -> String {
    symbols.iter().map(|&s| SYMBOLS.get(s).copied().unwrap_or("?")).collect()
}

/// Parses text such as `2+3*4` into symbol indices. `×` and `÷` are accepted.
pub fn parse(text: &str) -> Option<Vec<usize>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0'..='9' => Some(c as usize - '0' as usize),
            '+' => Some(PLUS),
            '-' | '−' => Some(MINUS),
            '*' | '×' => Some(TIMES),
            '/' | '÷' => Some(DIVIDE),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str) -> Result<f64, ProgramError> {
        evaluate_symbols(&parse(text).unwrap())
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1+1").unwrap(), 2.0);
        assert_eq!(eval("7+2").unwrap(), 9.0);
        assert_eq!(eval("2+3*4").unwrap(), 14.0);
        assert_eq!(eval("8-3-2").unwrap(), 3.0);
        assert_eq!(eval("8/4/2").unwrap(), 1.0);
        assert_eq!(eval("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(eval("9-2*3+4/8").unwrap(), 3.5);
        assert_eq!(eval("5").unwrap(), 5.0);
    }

    #[test]
    fn errors() {
        use crate::blackbox::ProgramErrorKind::*;
        assert_eq!(eval("1/0").unwrap_err().kind, DivideByZero);
        assert_eq!(eval("3*2/0").unwrap_err().kind, DivideByZero);
        assert_eq!(eval("1+").unwrap_err().kind, InvalidInput);
        assert_eq!(eval("+1").unwrap_err().kind, InvalidInput);
        assert_eq!(eval("12").unwrap_err().kind, InvalidInput);
        assert_eq!(eval("1++2").unwrap_err().kind, InvalidInput);
        assert_eq!(evaluate_symbols(&[]).unwrap_err().kind, InvalidInput);
    }

    #[test]
    fn parse_and_render() {
        let s = parse("1÷0").unwrap();
        assert_eq!(s, vec![1, DIVIDE, 0]);
        assert_eq!(render(&s), "1/0");
        assert!(parse("1^2").is_none());
    }
}
