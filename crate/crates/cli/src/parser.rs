use crate::ast::*;
use crate::diag::{Diagnostic, Pos};
use crate::lexer::{lex, Tok, Token};

const MAX_NESTING: usize = 64;
const MAX_EXPONENT: u32 = 1000;
const MAX_TERMS: usize = 10_000;

pub fn parse(src: &str) -> Result<Document, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, nesting: 0 };
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.stmt()?);
    }
    Ok(Document { stmts })
}

/// Parses a single class expression, e.g. `1 + 2*L^2*X`.
pub fn parse_class(src: &str) -> Result<ClassExpr, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, nesting: 0 };
    let e = p.class_expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    nesting: usize,
}

fn is_ident(w: &str) -> bool {
    w.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && !w.contains('.')
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Punct(c) => format!("`{c}`"),
        Tok::Arrow => "`->`".into(),
        Tok::Eof => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::new(self.pos(), format!("expected {wanted}, found {}", describe(self.peek())))
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == &Tok::Punct(c)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.at_word(w);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.at_punct(c);
        if hit {
            self.bump();
        }
        hit
    }

    fn keyword(&mut self, w: &str) -> Result<(), Diagnostic> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), Diagnostic> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn arrow(&mut self) -> Result<(), Diagnostic> {
        if self.peek() == &Tok::Arrow {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`->`"))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn name(&mut self) -> Result<String, Diagnostic> {
        match self.peek().clone() {
            Tok::Word(w) if is_ident(&w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn int(&mut self) -> Result<i64, Diagnostic> {
        let pos = self.pos();
        let neg = self.eat_punct('-');
        let w = self.word("an integer")?;
        let digits = if neg { format!("-{w}") } else { w };
        if !digits.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
            return Err(Diagnostic::new(pos, format!("`{digits}` is not an integer")));
        }
        digits
            .parse()
            .map_err(|_| Diagnostic::new(pos, format!("integer `{digits}` out of range")))
    }

    fn uint<T: TryFrom<i64>>(&mut self, what: &str) -> Result<T, Diagnostic> {
        let pos = self.pos();
        let v = self.int()?;
        T::try_from(v).map_err(|_| Diagnostic::new(pos, format!("{what} `{v}` out of range")))
    }

    fn enter(&mut self) -> Result<(), Diagnostic> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(Diagnostic::new(self.pos(), "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.unexpected("a statement")),
        };
        self.bump();
        let kind = match kw.as_str() {
            "atom" => {
                let name = self.name()?;
                self.keyword("euler")?;
                StmtKind::Atom {
                    name,
                    euler: self.int()?,
                }
            }
            "variety" => self.variety()?,
            "morphism" => self.morphism()?,
            "tower" => self.tower()?,
            "profn" => {
                let name = self.name()?;
                let (tower, level) = self.on_level()?;
                StmtKind::Profn {
                    name,
                    tower,
                    level,
                    values: self.value_block()?,
                }
            }
            "cyl" => {
                let name = self.name()?;
                let (tower, level) = self.on_level()?;
                StmtKind::Cyl {
                    name,
                    tower,
                    level,
                    sel: self.selection()?,
                }
            }
            "system" => self.system()?,
            "query" => StmtKind::Query(self.query()?),
            "check" => StmtKind::Check(self.check()?),
            _ => {
                return Err(Diagnostic::new(
                    pos,
                    format!("unknown statement `{kw}`"),
                ))
            }
        };
        Ok(Stmt { pos, kind })
    }

    fn variety(&mut self) -> Result<StmtKind, Diagnostic> {
        let name = self.name()?;
        let singular = self.eat_word("singular");
        self.punct('{')?;
        let mut strata = Vec::new();
        while !self.eat_punct('}') {
            self.keyword("stratum")?;
            let id = self.word("a stratum id")?;
            self.keyword("class")?;
            strata.push((id, self.class_expr()?));
            if !self.eat_punct(';') && !self.at_punct('}') {
                return Err(self.unexpected("`;` or `}`"));
            }
        }
        Ok(StmtKind::Variety {
            name,
            singular,
            strata,
        })
    }

    fn morphism(&mut self) -> Result<StmtKind, Diagnostic> {
        let name = self.name()?;
        self.punct(':')?;
        let source = self.name()?;
        self.arrow()?;
        let target = self.name()?;
        self.punct('{')?;
        let mut maps = Vec::new();
        while !self.eat_punct('}') {
            self.keyword("map")?;
            let from = self.word("a stratum id")?;
            self.arrow()?;
            let to = self.word("a stratum id")?;
            self.keyword("fiber")?;
            maps.push(MapEntry {
                from,
                to,
                fiber: self.class_expr()?,
            });
            if !self.eat_punct(';') && !self.at_punct('}') {
                return Err(self.unexpected("`;` or `}`"));
            }
        }
        let strict = self.eat_word("strict");
        Ok(StmtKind::Morphism {
            name,
            source,
            target,
            maps,
            strict,
        })
    }

    fn tower(&mut self) -> Result<StmtKind, Diagnostic> {
        let name = self.name()?;
        self.punct('=')?;
        let pos = self.pos();
        let kind = self.word("a tower kind")?;
        self.punct('(')?;
        let def = match kind.as_str() {
            "product" => TowerDef::Product(self.name()?),
            "bundle" => {
                let base = self.name()?;
                self.punct(';')?;
                let mut fibers = Vec::new();
                loop {
                    let mut pieces = vec![self.class_expr()?];
                    while self.eat_punct('|') {
                        pieces.push(self.class_expr()?);
                    }
                    fibers.push(pieces);
                    if !self.eat_punct(',') {
                        break;
                    }
                }
                let periodic = self.eat_word("periodic");
                TowerDef::Bundle {
                    base,
                    fibers,
                    periodic,
                }
            }
            "arcs" => {
                let base = self.name()?;
                self.punct(',')?;
                self.keyword("dim")?;
                self.punct('=')?;
                TowerDef::Arcs {
                    base,
                    dim: self.int()?,
                }
            }
            "steps" => {
                let mut steps = vec![self.name()?];
                while self.eat_punct(',') {
                    steps.push(self.name()?);
                }
                TowerDef::Steps(steps)
            }
            other => return Err(Diagnostic::new(pos, format!("unknown tower kind `{other}`"))),
        };
        self.punct(')')?;
        Ok(StmtKind::Tower { name, def })
    }

    fn on_level(&mut self) -> Result<(String, u32), Diagnostic> {
        self.keyword("on")?;
        let tower = self.name()?;
        self.keyword("level")?;
        Ok((tower, self.uint("level")?))
    }

    /// `{ id : INT, … }`, possibly empty, trailing comma allowed.
    fn value_block(&mut self) -> Result<Vec<(String, i64)>, Diagnostic> {
        self.punct('{')?;
        let mut values = Vec::new();
        while !self.eat_punct('}') {
            let id = self.word("a stratum id")?;
            self.punct(':')?;
            values.push((id, self.int()?));
            if !self.eat_punct(',') && !self.at_punct('}') {
                return Err(self.unexpected("`,` or `}`"));
            }
        }
        Ok(values)
    }

    fn id_list(&mut self, close: char) -> Result<Vec<String>, Diagnostic> {
        let mut ids = Vec::new();
        while !self.eat_punct(close) {
            ids.push(self.word("a stratum id")?);
            if !self.eat_punct(',') && !self.at_punct(close) {
                return Err(self.unexpected(&format!("`,` or `{close}`")));
            }
        }
        Ok(ids)
    }

    fn selection(&mut self) -> Result<Selection, Diagnostic> {
        if self.eat_word("all") {
            return Ok(Selection::All);
        }
        self.punct('{')?;
        Ok(Selection::Ids(self.id_list('}')?))
    }

    fn system(&mut self) -> Result<StmtKind, Diagnostic> {
        let name = self.name()?;
        self.keyword("on")?;
        let tower = self.name()?;
        let implied = if self.eat_word("implied") {
            if self.eat_word("composite") {
                Some(ImpliedKw::Composite)
            } else if self.eat_word("unit") {
                Some(ImpliedKw::Unit)
            } else {
                return Err(self.unexpected("`composite` or `unit`"));
            }
        } else {
            None
        };
        self.punct('{')?;
        let mut entries = Vec::new();
        while !self.eat_punct('}') {
            if self.eat_word("step") {
                let level = self.uint("level")?;
                entries.push(SystemEntry::Step {
                    level,
                    values: self.value_block()?,
                });
            } else if self.eat_word("between") {
                let lower = self.uint("level")?;
                let upper = self.uint("level")?;
                entries.push(SystemEntry::Between {
                    lower,
                    upper,
                    values: self.value_block()?,
                });
            } else {
                return Err(self.unexpected("`step`, `between` or `}`"));
            }
            self.eat_punct(';');
        }
        Ok(StmtKind::System {
            name,
            tower,
            implied,
            entries,
        })
    }

    fn keyword_arg(&mut self, key: &str) -> Result<Option<i64>, Diagnostic> {
        if self.at_word(key) && self.peek_at(1) == &Tok::Punct('=') {
            self.bump();
            self.bump();
            Ok(Some(self.int()?))
        } else {
            Ok(None)
        }
    }

    fn shift(&mut self) -> Result<i32, Diagnostic> {
        let pos = self.pos();
        match self.keyword_arg("w")? {
            None => Ok(0),
            Some(w) => i32::try_from(w).map_err(|_| Diagnostic::new(pos, "shift out of range")),
        }
    }

    fn query(&mut self) -> Result<Query, Diagnostic> {
        let pos = self.pos();
        let kind = self.word("a query kind")?;
        Ok(match kind.as_str() {
            "chi" => Query::Chi(self.pf()?),
            "gamma" => Query::Gamma(self.pf()?),
            "chipro" => {
                let pf = self.pf()?;
                Query::ChiPro { pf, w: self.shift()? }
            }
            "gammapro" => {
                let pf = self.pf()?;
                Query::GammaPro { pf, w: self.shift()? }
            }
            "measure" => Query::Measure(self.pf()?),
            "integrate" => {
                let gamma = if self.eat_word("chi") {
                    false
                } else if self.eat_word("gamma") {
                    true
                } else {
                    return Err(self.unexpected("`chi` or `gamma`"));
                };
                let pf = self.pf()?;
                let f = if self.at_word("f") && self.peek_at(1) == &Tok::Punct('=') {
                    self.bump();
                    self.bump();
                    match self.word("`id`, `one` or `square`")?.as_str() {
                        "id" => Weight::Identity,
                        "one" => Weight::One,
                        "square" => Weight::Square,
                        _ => return Err(Diagnostic::new(self.toks[self.i - 1].pos, "expected `id`, `one` or `square`")),
                    }
                } else {
                    Weight::Identity
                };
                Query::Integrate { gamma, pf, f }
            }
            "eq" => {
                let a = self.pf()?;
                Query::Eq(a, self.pf()?)
            }
            "eval" => {
                let pf = self.pf()?;
                self.keyword("at")?;
                self.punct('(')?;
                Query::Eval {
                    pf,
                    point: self.id_list(')')?,
                }
            }
            "stable" => {
                let pf = self.pf()?;
                Query::Stable {
                    pf,
                    p: self.keyword_arg("p")?,
                }
            }
            "class" => {
                let tower = self.name()?;
                Query::Class {
                    tower,
                    level: self.uint("level")?,
                }
            }
            "levelsets" => Query::LevelSets(self.pf()?),
            other => return Err(Diagnostic::new(pos, format!("unknown query `{other}`"))),
        })
    }

    fn check(&mut self) -> Result<Check, Diagnostic> {
        let pos = self.pos();
        let kind = self.word("a check kind")?;
        let kind = match kind.as_str() {
            "projection_formula" => CheckKind::ProjectionFormula,
            "naturality" => {
                let tower = self.name()?;
                let via = if self.eat_word("via") {
                    Some(self.name()?)
                } else {
                    None
                };
                CheckKind::Naturality { tower, via }
            }
            "system" => CheckKind::System(self.name()?),
            "diagrams" => CheckKind::Diagrams(self.name()?),
            "stability" => {
                let pf = self.pf()?;
                CheckKind::Stability {
                    pf,
                    p: self.keyword_arg("p")?,
                }
            }
            other => return Err(Diagnostic::new(pos, format!("unknown check `{other}`"))),
        };
        let depth = if self.eat_word("depth") {
            Some(self.uint("depth")?)
        } else {
            None
        };
        let seed = if self.eat_word("seed") {
            Some(self.uint("seed")?)
        } else {
            None
        };
        Ok(Check { kind, depth, seed })
    }

    fn pf(&mut self) -> Result<PfExpr, Diagnostic> {
        self.enter()?;
        let r = self.pf_inner();
        self.leave();
        r
    }

    fn pf_inner(&mut self) -> Result<PfExpr, Diagnostic> {
        let head = self.name()?;
        if !self.at_punct('(') {
            return Ok(PfExpr::Name(head));
        }
        let pos = self.pos();
        self.bump();
        let e = match head.as_str() {
            "one" => PfExpr::One(self.name()?),
            "zero" => PfExpr::Zero(self.name()?),
            "cyl" => {
                let tower = self.name()?;
                self.punct(',')?;
                let level = self.uint("level")?;
                self.punct(',')?;
                PfExpr::Cyl {
                    tower,
                    level,
                    sel: self.selection()?,
                }
            }
            "lift" => {
                let inner = self.pf()?;
                self.punct(',')?;
                PfExpr::Lift(Box::new(inner), self.uint("level")?)
            }
            "sum" => {
                let mut terms = vec![self.pf()?];
                while self.eat_punct(',') {
                    terms.push(self.pf()?);
                }
                PfExpr::Sum(terms)
            }
            "scale" => {
                let k = self.int()?;
                self.punct(',')?;
                PfExpr::Scale(k, Box::new(self.pf()?))
            }
            other => return Err(Diagnostic::new(pos, format!("unknown function `{other}`"))),
        };
        self.punct(')')?;
        Ok(e)
    }

    fn class_expr(&mut self) -> Result<ClassExpr, Diagnostic> {
        self.enter()?;
        let r = self.class_sum();
        self.leave();
        r
    }

    fn overflow(pos: Pos) -> Diagnostic {
        Diagnostic::new(pos, "class expression overflows")
    }

    fn checked(pos: Pos, e: Option<ClassExpr>) -> Result<ClassExpr, Diagnostic> {
        let e = e.ok_or_else(|| Self::overflow(pos))?;
        if e.terms.len() > MAX_TERMS {
            return Err(Diagnostic::new(pos, "class expression too large"));
        }
        Ok(e)
    }

    fn class_sum(&mut self) -> Result<ClassExpr, Diagnostic> {
        let pos = self.pos();
        let mut acc = if self.eat_punct('-') {
            Self::checked(pos, self.class_term()?.neg())?
        } else {
            self.class_term()?
        };
        loop {
            let pos = self.pos();
            if self.eat_punct('+') {
                let t = self.class_term()?;
                acc = Self::checked(pos, acc.add(&t))?;
            } else if self.eat_punct('-') {
                let t = self.class_term()?;
                acc = Self::checked(pos, t.neg().and_then(|t| acc.add(&t)))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn class_term(&mut self) -> Result<ClassExpr, Diagnostic> {
        let mut acc = self.class_factor()?;
        loop {
            let pos = self.pos();
            if !self.eat_punct('*') {
                return Ok(acc);
            }
            let f = self.class_factor()?;
            acc = Self::checked(pos, acc.mul(&f))?;
        }
    }

    fn class_factor(&mut self) -> Result<ClassExpr, Diagnostic> {
        let pos = self.pos();
        let base = if self.eat_punct('(') {
            let e = self.class_expr()?;
            self.punct(')')?;
            e
        } else {
            let w = self.word("an atom or integer")?;
            if w.bytes().all(|b| b.is_ascii_digit()) {
                ClassExpr::constant(
                    w.parse()
                        .map_err(|_| Diagnostic::new(pos, format!("integer `{w}` out of range")))?,
                )
            } else if is_ident(&w) {
                ClassExpr::atom(&w)
            } else {
                return Err(Diagnostic::new(pos, format!("`{w}` is not an atom name")));
            }
        };
        if !self.eat_punct('^') {
            return Ok(base);
        }
        let epos = self.pos();
        let e: u32 = self.uint("exponent")?;
        if e > MAX_EXPONENT {
            return Err(Diagnostic::new(epos, format!("exponent {e} exceeds {MAX_EXPONENT}")));
        }
        let mut out = ClassExpr::constant(1);
        for _ in 0..e {
            out = Self::checked(epos, out.mul(&base))?;
        }
        Ok(out)
    }
}
