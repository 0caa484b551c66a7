//! Netlist parser for the emitted dialect plus a tolerant superset:
//! `*` comment lines anywhere, `+` continuation lines, case-insensitive
//! keywords, arbitrary whitespace.

use super::{Circuit, Directive, Element, ElementKind, SourceKind, SweepKind};
use crate::error::{Error, Result};
use crate::values::parse_magnitude;

pub fn parse(text: &str) -> Result<Circuit> {
    let lines = fold_lines(text);
    let mut circuit = Circuit::default();
    let mut ended_at: Option<usize> = None;
    let mut subckt: Option<(usize, String, Vec<String>, Vec<Element>)> = None;

    let mut it = lines.iter().peekable();

    // A leading `* ...` line carries the title.
    if let Some((_, first)) = it.peek() {
        if let Some(rest) = first.strip_prefix('*') {
            circuit.title = rest.trim().to_string();
            it.next();
        }
    }

    for (line_no, line) in it {
        let line_no = *line_no;
        if line.starts_with('*') {
            continue;
        }
        if let Some(end_line) = ended_at {
            return Err(err(line_no, format!("content after .end (line {end_line})")));
        }

        let tokens: Vec<&str> = line.split_whitespace().collect();
        let first = tokens[0];

        if let Some(word) = first.strip_prefix('.') {
            let keyword = word.to_ascii_lowercase();
            match keyword.as_str() {
                "subckt" => {
                    if subckt.is_some() {
                        return Err(err(line_no, "nested .subckt is not supported".into()));
                    }
                    if tokens.len() < 3 {
                        return Err(err(line_no, ".subckt needs a name and at least one port".into()));
                    }
                    subckt = Some((
                        line_no,
                        tokens[1].to_string(),
                        tokens[2..].iter().map(|s| s.to_string()).collect(),
                        Vec::new(),
                    ));
                }
                "ends" => match subckt.take() {
                    Some((_, name, ports, body)) => {
                        circuit.directives.push(Directive::Subckt { name, ports, body });
                    }
                    None => return Err(err(line_no, ".ends without matching .subckt".into())),
                },
                "model" => {
                    ensure_top_level(&subckt, line_no, ".model")?;
                    circuit.directives.push(parse_model(line_no, line)?);
                }
                "tran" => {
                    ensure_top_level(&subckt, line_no, ".tran")?;
                    if !(2..=3).contains(&tokens.len()) {
                        return Err(err(line_no, ".tran expects a stop time".into()));
                    }
                    // two-number form is `tstep tstop`; keep the stop
                    let stop = value(line_no, tokens[tokens.len() - 1])?;
                    circuit.directives.push(Directive::Tran { stop });
                }
                "ac" => {
                    ensure_top_level(&subckt, line_no, ".ac")?;
                    if tokens.len() != 5 {
                        return Err(err(line_no, ".ac expects: sweep points fstart fstop".into()));
                    }
                    let sweep = match tokens[1].to_ascii_lowercase().as_str() {
                        "dec" => SweepKind::Dec,
                        "oct" => SweepKind::Oct,
                        "lin" => SweepKind::Lin,
                        other => return Err(err(line_no, format!("unknown sweep kind '{other}'"))),
                    };
                    let points: u32 = tokens[2]
                        .parse()
                        .map_err(|_| err(line_no, format!("bad point count '{}'", tokens[2])))?;
                    circuit.directives.push(Directive::Ac {
                        sweep,
                        points,
                        f_start: value(line_no, tokens[3])?,
                        f_stop: value(line_no, tokens[4])?,
                    });
                }
                "end" => {
                    ensure_top_level(&subckt, line_no, ".end")?;
                    circuit.directives.push(Directive::End);
                    ended_at = Some(line_no);
                }
                other => return Err(err(line_no, format!("unknown directive .{other}"))),
            }
            continue;
        }

        let element = parse_element(line_no, &tokens)?;
        match &mut subckt {
            Some((_, _, _, body)) => body.push(element),
            None => circuit.elements.push(element),
        }
    }

    if let Some((line_no, name, _, _)) = subckt {
        return Err(err(line_no, format!("unterminated .subckt '{name}'")));
    }
    if ended_at.is_none() {
        return Err(err(lines.last().map(|(n, _)| *n + 1).unwrap_or(1), "missing .end".into()));
    }

    circuit.validate().map_err(|e| match e {
        Error::Structure(msg) => err(ended_at.unwrap_or(1), msg),
        other => other,
    })?;
    Ok(circuit)
}

/// Joins `+` continuation lines onto their parents, dropping blanks.
/// Each folded line keeps the number of its first physical line.
fn fold_lines(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(cont) = trimmed.strip_prefix('+') {
            if let Some((_, prev)) = out.last_mut() {
                prev.push(' ');
                prev.push_str(cont.trim());
                continue;
            }
            // a leading continuation has nothing to attach to; let the
            // element parser report it on the right line
        }
        out.push((idx + 1, trimmed.to_string()));
    }
    out
}

fn ensure_top_level(
    subckt: &Option<(usize, String, Vec<String>, Vec<Element>)>,
    line_no: usize,
    what: &str,
) -> Result<()> {
    if subckt.is_some() {
        return Err(err(line_no, format!("{what} is not allowed inside .subckt")));
    }
    Ok(())
}

fn parse_element(line_no: usize, tokens: &[&str]) -> Result<Element> {
    let label = tokens[0].to_string();
    let letter = label.chars().next().unwrap().to_ascii_uppercase();

    let arity_err = |need: usize| {
        err(
            line_no,
            format!("{label}: expected {need} nodes and a value, found {} tokens", tokens.len()),
        )
    };

    let kind = match letter {
        'R' | 'C' => {
            if tokens.len() != 4 {
                return Err(arity_err(2));
            }
            let v = value(line_no, tokens[3])?;
            if letter == 'R' {
                ElementKind::Resistor(v)
            } else {
                ElementKind::Capacitor(v)
            }
        }
        'V' => {
            if tokens.len() < 4 {
                return Err(arity_err(2));
            }
            ElementKind::Source(parse_source(line_no, &tokens[3..])?)
        }
        'Q' => {
            if tokens.len() != 5 {
                return Err(err(line_no, format!("{label}: expected c b e <model>")));
            }
            ElementKind::Bjt { model: tokens[4].to_string() }
        }
        'X' => {
            if tokens.len() < 3 {
                return Err(err(line_no, format!("{label}: expected node list and subckt name")));
            }
            ElementKind::Subckt { name: tokens[tokens.len() - 1].to_string() }
        }
        'E' | 'G' => {
            if tokens.len() != 6 {
                return Err(err(line_no, format!("{label}: expected out+ out- in+ in- <value>")));
            }
            let v = value(line_no, tokens[5])?;
            if letter == 'E' {
                ElementKind::Vcvs(v)
            } else {
                ElementKind::Vccs(v)
            }
        }
        other => return Err(err(line_no, format!("unknown element letter '{other}'"))),
    };

    let node_range = match letter {
        'Q' => 1..4,
        'X' => 1..tokens.len() - 1,
        'E' | 'G' => 1..5,
        _ => 1..3,
    };
    let nodes = tokens[node_range].iter().map(|s| s.to_string()).collect();
    Ok(Element { label, nodes, kind })
}

fn parse_source(line_no: usize, rest: &[&str]) -> Result<SourceKind> {
    let first_upper = rest[0].to_ascii_uppercase();
    if first_upper.starts_with("SINE") {
        let joined = rest.join(" ");
        let open = joined.find('(').ok_or_else(|| err(line_no, "SINE source needs (offset amplitude freq)".into()))?;
        let close = joined.rfind(')').ok_or_else(|| err(line_no, "unterminated SINE(...)".into()))?;
        let args: Vec<&str> = joined[open + 1..close].split_whitespace().collect();
        if args.len() != 3 {
            return Err(err(line_no, format!("SINE expects 3 arguments, found {}", args.len())));
        }
        return Ok(SourceKind::Sine {
            offset: value(line_no, args[0])?,
            amplitude: value(line_no, args[1])?,
            freq: value(line_no, args[2])?,
        });
    }
    match first_upper.as_str() {
        "AC" => {
            if rest.len() != 2 {
                return Err(err(line_no, "AC source expects a magnitude".into()));
            }
            Ok(SourceKind::Ac(value(line_no, rest[1])?))
        }
        "DC" => {
            if rest.len() != 2 {
                return Err(err(line_no, "DC source expects a value".into()));
            }
            Ok(SourceKind::Dc(value(line_no, rest[1])?))
        }
        _ => {
            if rest.len() != 1 {
                return Err(err(line_no, format!("unexpected source tokens {rest:?}")));
            }
            Ok(SourceKind::Dc(value(line_no, rest[0])?))
        }
    }
}

fn parse_model(line_no: usize, line: &str) -> Result<Directive> {
    // .model NAME KIND(K=V ...)   (parens optional when parameter-free)
    let rest = line[".model".len()..].trim();
    let (name, tail) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| err(line_no, ".model needs a name and a kind".into()))?;
    let tail = tail.trim();
    let (kind, params_text) = match tail.find('(') {
        Some(open) => {
            let close = tail.rfind(')').ok_or_else(|| err(line_no, "unterminated model parameter list".into()))?;
            (tail[..open].trim(), tail[open + 1..close].trim())
        }
        None => (tail, ""),
    };
    let mut params = Vec::new();
    for item in params_text.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("model parameter '{item}' is not KEY=VALUE")))?;
        params.push((k.to_uppercase(), value(line_no, v)?));
    }
    Ok(Directive::Model {
        name: name.to_string(),
        kind: kind.to_uppercase(),
        params,
    })
}

fn value(line_no: usize, text: &str) -> Result<f64> {
    parse_magnitude(text).map_err(|e| err(line_no, format!("bad value '{text}': {e}")))
}

fn err(line: usize, msg: String) -> Error {
    Error::NetlistParse { line, msg }
}

#[cfg(test)]
mod tests {
    use super::super::emit;
    use super::*;

    const SIMPLE: &str = "* t\nV1 in 0 SINE(0 10m 1k)\nR1 in out 1k\nC1 out 0 1u\n.end\n";

    #[test]
    fn parses_the_dialect() {
        let c = parse(SIMPLE).unwrap();
        assert_eq!(c.title, "t");
        assert_eq!(c.elements.len(), 3);
        assert_eq!(
            c.elements[0].kind,
            ElementKind::Source(SourceKind::Sine { offset: 0.0, amplitude: 0.01, freq: 1000.0 })
        );
    }

    #[test]
    fn continuation_lines_fold() {
        let folded = parse("* t\nV1 in 0\n+ SINE(0 10m 1k)\nR1 in 0 1k\n.end\n").unwrap();
        let inline = parse("* t\nV1 in 0 SINE(0 10m 1k)\nR1 in 0 1k\n.end\n").unwrap();
        assert_eq!(emit(&folded), emit(&inline));
    }

    #[test]
    fn comments_and_case_are_tolerated() {
        let text = "* t\n* a comment\nv1 IN 0 sine(0 10M 1K)\nR1 IN 0 1K\n.END\n";
        let c = parse(text).unwrap();
        assert_eq!(c.elements.len(), 2);
        match &c.elements[0].kind {
            ElementKind::Source(SourceKind::Sine { amplitude, freq, .. }) => {
                assert_eq!(*amplitude, 0.01); // M is milli regardless of case
                assert_eq!(*freq, 1000.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("* t\nR1 n1 0\n.end\n") {
            Err(Error::NetlistParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        // without a title line the bad card is line 1
        match parse("R1 n1 0\n.end\n") {
            Err(Error::NetlistParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse("* t\nW1 a 0 5\n.end\n") {
            Err(Error::NetlistParse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("unknown element letter"));
            }
            other => panic!("{other:?}"),
        }
        match parse("* t\nR1 a 0 1k\n") {
            Err(Error::NetlistParse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("missing .end"));
            }
            other => panic!("{other:?}"),
        }
        match parse("* t\nR1 a 0 1k\n.subckt op a b\nR2 a b 1\n.end\n") {
            Err(Error::NetlistParse { msg, .. }) => assert!(msg.contains(".end is not allowed")),
            other => panic!("{other:?}"),
        }
        match parse("* t\nR1 a 0 1k\n.subckt op a b\nR2 a b 1\n") {
            Err(Error::NetlistParse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("unterminated"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("").is_err());
        match parse("* t\nR1 a 0 1k\n.end\nR2 b 0 1k\n") {
            Err(Error::NetlistParse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("after .end"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subckt_round_trip() {
        let text = "* t\nV1 in 0 AC 1\nR1 in out 1k\nXU1 in out 0 0 out opamp_ideal\n.subckt opamp_ideal inp inn vdd vss out\nE1 out 0 inp inn 10Meg\n.ends\n.end\n";
        let c = parse(text).unwrap();
        let (ports, body) = c.find_subckt("OPAMP_IDEAL").expect("ci lookup");
        assert_eq!(ports.len(), 5);
        assert_eq!(body.len(), 1);
        assert_eq!(emit(&parse(&emit(&c)).unwrap()), emit(&c));
    }

    #[test]
    fn dc_source_forms() {
        let c = parse("* t\nVCC vcc 0 12\nV2 a 0 DC 5\nR1 vcc a 1k\nR2 a 0 1k\n.end\n").unwrap();
        assert_eq!(c.elements[0].kind, ElementKind::Source(SourceKind::Dc(12.0)));
        assert_eq!(c.elements[1].kind, ElementKind::Source(SourceKind::Dc(5.0)));
    }
}
