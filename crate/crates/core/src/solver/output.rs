//! Reading solver standard output.
//!
//! Two dialects are understood:
//!
//! * smodels-classic: `Answer: 1` then `Stable Model: a b c`, or `False`;
//! * clasp/clingo: `Answer: 1` then a line of atoms, `SATISFIABLE` or
//!   `UNSATISFIABLE`.
//!
//! Only the first model is used.

use super::term::{parse_atoms_at, AnswerSet, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutput {
    Model(AnswerSet),
    Unsat,
}

const STABLE_MODEL: &str = "Stable Model:";

fn model_at(line: &str, number: usize, offset: usize) -> Result<SolverOutput, ParseError> {
    let atoms = parse_atoms_at(line, number, offset)?;
    Ok(SolverOutput::Model(atoms.into_iter().collect()))
}

/// Extracts the first model, or the unsatisfiability verdict, from complete
/// solver output.
pub fn parse_answer_set(output: &str) -> Result<SolverOutput, ParseError> {
    let lines: Vec<&str> = output.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let number = i + 1;
        let trimmed = line.trim();
        if let Some(pos) = line.find(STABLE_MODEL) {
            let start = pos + STABLE_MODEL.len();
            return model_at(&line[start..], number, start);
        }
        if trimmed.starts_with("Answer:") {
            // smodels prints `Stable Model:` on the following line; clasp
            // prints the bare atoms.
            match lines.get(i + 1) {
                Some(next) if next.contains(STABLE_MODEL) => {}
                Some(next) => return model_at(next, number + 1, 0),
                None => return model_at("", number + 1, 0),
            }
        } else if trimmed == "False" || trimmed == "UNSATISFIABLE" {
            return Ok(SolverOutput::Unsat);
        }
        i += 1;
    }
    Err(ParseError {
        line: lines.len().max(1),
        column: 1,
        message: "no model and no unsatisfiability verdict".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(out: &str) -> AnswerSet {
        match parse_answer_set(out).unwrap() {
            SolverOutput::Model(m) => m,
            SolverOutput::Unsat => panic!("unexpected unsat"),
        }
    }

    #[test]
    fn smodels_dialect() {
        let m = model("Stable Model: occurs(attack,0) holds(at(w0),0)\nTrue\n");
        assert_eq!(m.len(), 2);
        let m = model("smodels version 2.34. Reading...done\nAnswer: 1\nStable Model: p q(1)\nTrue\nDuration 0.001\n");
        assert_eq!(m.render(), "p q(1)");
        assert_eq!(parse_answer_set("False").unwrap(), SolverOutput::Unsat);
        assert_eq!(
            parse_answer_set("smodels version 2.34. Reading...done\nFalse\nDuration 0.0\n")
                .unwrap(),
            SolverOutput::Unsat
        );
    }

    #[test]
    fn clasp_dialect() {
        let out = "clingo version 5.7.1\nReading from stdin\nSolving...\nAnswer: 1\noccurs(move_towards(w1),0) occurs(attack,1)\nSATISFIABLE\n\nModels       : 1+\n";
        let m = model(out);
        assert_eq!(m.len(), 2);
        assert!(m.render().contains("occurs(move_towards(w1),0)"));
        let out = "clasp version 3.3.10\nReading from stdin\nSolving...\nUNSATISFIABLE\n";
        assert_eq!(parse_answer_set(out).unwrap(), SolverOutput::Unsat);
    }

    #[test]
    fn empty_model() {
        assert!(model("Answer: 1\n\nSATISFIABLE\n").is_empty());
        assert!(model("Answer: 1").is_empty());
    }

    #[test]
    fn nested_terms() {
        let m = model(
            "Answer: 1\nreact(0,under_attack,elude(w2)) holds(item_available(g1,w3,weapon(2)),0)\n",
        );
        let atoms: Vec<String> = m.atoms.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            atoms,
            [
                "holds(item_available(g1,w3,weapon(2)),0)",
                "react(0,under_attack,elude(w2))"
            ]
        );
    }

    #[test]
    fn errors_point_at_the_token() {
        let e = parse_answer_set("Stable Model: p(a,) q").unwrap_err();
        assert_eq!((e.line, e.column), (1, 19));
        let e = parse_answer_set("x\nAnswer: 1\np Q\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        assert!(parse_answer_set("INTERRUPTED\n").is_err());
        assert!(parse_answer_set("").is_err());
    }
}
