use std::fmt::{self, Display, Formatter, Write};

use crate::ast::*;

/// Canonical text of a document; parsing it gives back an equal document.
pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for s in &doc.stmts {
        writeln!(out, "{}", s.kind).expect("writing to a String");
    }
    out
}

fn mono(f: &mut Formatter<'_>, m: &Mono) -> fmt::Result {
    for (i, (s, e)) in m.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        f.write_str(s)?;
        if *e != 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl Display for ClassExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, &c)) in self.terms.iter().enumerate() {
            let mag = c.unsigned_abs();
            match (i, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if mag != 1 {
                    write!(f, "{mag}*")?;
                }
                mono(f, m)?;
            }
        }
        Ok(())
    }
}

fn comma_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn values(f: &mut Formatter<'_>, vs: &[(String, i64)]) -> fmt::Result {
    if vs.is_empty() {
        return f.write_str("{}");
    }
    f.write_str("{ ")?;
    for (i, (id, v)) in vs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{id}: {v}")?;
    }
    f.write_str(" }")
}

impl Display for Selection {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Selection::All => f.write_str("all"),
            Selection::Ids(ids) if ids.is_empty() => f.write_str("{}"),
            Selection::Ids(ids) => {
                f.write_str("{ ")?;
                comma_list(f, ids)?;
                f.write_str(" }")
            }
        }
    }
}

impl Display for PfExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PfExpr::Name(n) => f.write_str(n),
            PfExpr::One(t) => write!(f, "one({t})"),
            PfExpr::Zero(t) => write!(f, "zero({t})"),
            PfExpr::Cyl { tower, level, sel } => write!(f, "cyl({tower}, {level}, {sel})"),
            PfExpr::Lift(p, m) => write!(f, "lift({p}, {m})"),
            PfExpr::Sum(ts) => {
                f.write_str("sum(")?;
                comma_list(f, ts)?;
                f.write_str(")")
            }
            PfExpr::Scale(k, p) => write!(f, "scale({k}, {p})"),
        }
    }
}

fn shift(f: &mut Formatter<'_>, w: i32) -> fmt::Result {
    if w != 0 {
        write!(f, " w={w}")?;
    }
    Ok(())
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Chi(p) => write!(f, "chi {p}"),
            Query::Gamma(p) => write!(f, "gamma {p}"),
            Query::ChiPro { pf, w } => {
                write!(f, "chipro {pf}")?;
                shift(f, *w)
            }
            Query::GammaPro { pf, w } => {
                write!(f, "gammapro {pf}")?;
                shift(f, *w)
            }
            Query::Measure(p) => write!(f, "measure {p}"),
            Query::Integrate { gamma, pf, f: w } => {
                write!(f, "integrate {} {pf}", if *gamma { "gamma" } else { "chi" })?;
                match w {
                    Weight::Identity => Ok(()),
                    Weight::One => f.write_str(" f=one"),
                    Weight::Square => f.write_str(" f=square"),
                }
            }
            Query::Eq(a, b) => write!(f, "eq {a} {b}"),
            Query::Eval { pf, point } => {
                write!(f, "eval {pf} at (")?;
                comma_list(f, point)?;
                f.write_str(")")
            }
            Query::Stable { pf, p } => {
                write!(f, "stable {pf}")?;
                match p {
                    Some(p) => write!(f, " p={p}"),
                    None => Ok(()),
                }
            }
            Query::Class { tower, level } => write!(f, "class {tower} {level}"),
            Query::LevelSets(p) => write!(f, "levelsets {p}"),
        }
    }
}

impl Display for Check {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CheckKind::ProjectionFormula => f.write_str("projection_formula")?,
            CheckKind::Naturality { tower, via } => {
                write!(f, "naturality {tower}")?;
                if let Some(m) = via {
                    write!(f, " via {m}")?;
                }
            }
            CheckKind::System(s) => write!(f, "system {s}")?,
            CheckKind::Diagrams(t) => write!(f, "diagrams {t}")?,
            CheckKind::Stability { pf, p } => {
                write!(f, "stability {pf}")?;
                if let Some(p) = p {
                    write!(f, " p={p}")?;
                }
            }
        }
        if let Some(d) = self.depth {
            write!(f, " depth {d}")?;
        }
        if let Some(s) = self.seed {
            write!(f, " seed {s}")?;
        }
        Ok(())
    }
}

impl Display for StmtKind {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            StmtKind::Atom { name, euler } => write!(f, "atom {name} euler {euler}"),
            StmtKind::Variety {
                name,
                singular,
                strata,
            } => {
                write!(f, "variety {name}")?;
                if *singular {
                    f.write_str(" singular")?;
                }
                if strata.is_empty() {
                    return f.write_str(" {}");
                }
                f.write_str(" {\n")?;
                for (id, c) in strata {
                    writeln!(f, "  stratum {id} class {c};")?;
                }
                f.write_str("}")
            }
            StmtKind::Morphism {
                name,
                source,
                target,
                maps,
                strict,
            } => {
                write!(f, "morphism {name} : {source} -> {target}")?;
                if maps.is_empty() {
                    f.write_str(" {}")?;
                } else {
                    f.write_str(" {\n")?;
                    for m in maps {
                        writeln!(f, "  map {} -> {} fiber {};", m.from, m.to, m.fiber)?;
                    }
                    f.write_str("}")?;
                }
                if *strict {
                    f.write_str(" strict")?;
                }
                Ok(())
            }
            StmtKind::Tower { name, def } => {
                write!(f, "tower {name} = ")?;
                match def {
                    TowerDef::Product(x) => write!(f, "product({x})"),
                    TowerDef::Bundle {
                        base,
                        fibers,
                        periodic,
                    } => {
                        write!(f, "bundle({base}; ")?;
                        for (i, pieces) in fibers.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            for (j, p) in pieces.iter().enumerate() {
                                if j > 0 {
                                    f.write_str(" | ")?;
                                }
                                write!(f, "{p}")?;
                            }
                        }
                        if *periodic {
                            f.write_str(" periodic")?;
                        }
                        f.write_str(")")
                    }
                    TowerDef::Arcs { base, dim } => write!(f, "arcs({base}, dim={dim})"),
                    TowerDef::Steps(ms) => {
                        f.write_str("steps(")?;
                        comma_list(f, ms)?;
                        f.write_str(")")
                    }
                }
            }
            StmtKind::Profn {
                name,
                tower,
                level,
                values: vs,
            } => {
                write!(f, "profn {name} on {tower} level {level} ")?;
                values(f, vs)
            }
            StmtKind::Cyl {
                name,
                tower,
                level,
                sel,
            } => write!(f, "cyl {name} on {tower} level {level} {sel}"),
            StmtKind::System {
                name,
                tower,
                implied,
                entries,
            } => {
                write!(f, "system {name} on {tower}")?;
                match implied {
                    Some(ImpliedKw::Composite) => f.write_str(" implied composite")?,
                    Some(ImpliedKw::Unit) => f.write_str(" implied unit")?,
                    None => {}
                }
                if entries.is_empty() {
                    return f.write_str(" {}");
                }
                f.write_str(" {\n")?;
                for e in entries {
                    match e {
                        SystemEntry::Step { level, values: vs } => {
                            write!(f, "  step {level} ")?;
                            values(f, vs)?;
                        }
                        SystemEntry::Between {
                            lower,
                            upper,
                            values: vs,
                        } => {
                            write!(f, "  between {lower} {upper} ")?;
                            values(f, vs)?;
                        }
                    }
                    f.write_str("\n")?;
                }
                f.write_str("}")
            }
            StmtKind::Query(q) => write!(f, "query {q}"),
            StmtKind::Check(c) => write!(f, "check {c}"),
        }
    }
}
