//! JSON circuit files. Lines are 1-based on disk and 0-based in memory; this
//! module is the only place that converts between the two.

use serde_json::{json, Map, Value};

use super::input::{Block, InputSpec};
use super::matchgate::{Matchgate, MatchgateAngles};
use super::program::{Basis, Circuit, Guard, Instruction, Macro, Role};
use crate::error::{Error, Result};
use crate::linalg::*;

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    circuit_from_value(&v)
}

/// Canonical text: sorted keys, shortest round-trip floats, trailing newline.
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut s = serde_json::to_string(&circuit_to_value(c)).expect("json values always serialize");
    s.push('\n');
    s
}

fn schema(detail: impl Into<String>) -> Error {
    Error::validation("schema", detail)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("{ctx}: missing `{key}`")))
}

fn as_obj<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(format!("{ctx}: expected object")))
}

fn as_arr<'a>(v: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(format!("{ctx}: expected array")))
}

fn as_f64(v: &Value, ctx: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(format!("{ctx}: expected number")))
}

fn as_str<'a>(v: &'a Value, ctx: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(format!("{ctx}: expected string")))
}

/// 1-based line number on disk → 0-based index.
fn as_line(v: &Value, ctx: &str) -> Result<usize> {
    let l = v.as_u64().ok_or_else(|| schema(format!("{ctx}: expected positive integer line")))?;
    if l == 0 {
        return Err(Error::validation("line-range", format!("{ctx}: lines are numbered from 1")));
    }
    Ok(l as usize - 1)
}

fn complex(v: &Value, ctx: &str) -> Result<C64> {
    let a = as_arr(v, ctx)?;
    if a.len() != 2 {
        return Err(schema(format!("{ctx}: complex numbers are [re, im]")));
    }
    Ok(c(as_f64(&a[0], ctx)?, as_f64(&a[1], ctx)?))
}

fn complex_list(v: &Value, len: usize, ctx: &str) -> Result<Vec<C64>> {
    let a = as_arr(v, ctx)?;
    if a.len() != len {
        return Err(schema(format!("{ctx}: expected {len} entries, found {}", a.len())));
    }
    a.iter().map(|x| complex(x, ctx)).collect()
}

fn mat2_from(v: &Value, ctx: &str) -> Result<Mat2> {
    let e = complex_list(v, 4, ctx)?;
    Ok([[e[0], e[1]], [e[2], e[3]]])
}

fn mat4_from(v: &Value, ctx: &str) -> Result<Mat4> {
    let e = complex_list(v, 16, ctx)?;
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = e[4 * i + j];
        }
    }
    Ok(m)
}

fn num(x: f64) -> Value {
    // Non-finite values are rejected during validation, so this cannot fail.
    Value::from(x)
}

fn cval(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn mat2_value(m: &Mat2) -> Value {
    Value::Array(m.iter().flatten().map(|z| cval(*z)).collect())
}

fn mat4_value(m: &Mat4) -> Value {
    Value::Array(m.iter().flatten().map(|z| cval(*z)).collect())
}

fn line_value(l: usize) -> Value {
    Value::from(l as u64 + 1)
}

fn block_from(v: &Value) -> Result<Block> {
    let o = as_obj(v, "input block")?;
    let kind = as_str(field(o, "kind", "input block")?, "input block kind")?;
    match kind {
        "bits" => {
            let s = as_str(field(o, "value", "bits")?, "bits value")?;
            let bits = s
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(schema(format!("bits: invalid character `{ch}`"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            Ok(Block::Bits(bits))
        }
        "product" => {
            let states = as_arr(field(o, "states", "product")?, "product states")?;
            let mut out = Vec::with_capacity(states.len());
            for s in states {
                let q = as_arr(s, "product state")?;
                if q.len() != 4 {
                    return Err(schema("product state: expected [re, im, re, im]"));
                }
                let f: Vec<f64> = q.iter().map(|x| as_f64(x, "product state")).collect::<Result<_>>()?;
                out.push([c(f[0], f[1]), c(f[2], f[3])]);
            }
            Ok(Block::Product(out))
        }
        "entangled" => {
            let k = field(o, "k", "entangled")?.as_u64().ok_or_else(|| schema("entangled: k must be an integer"))? as usize;
            if k == 0 || k > super::input::MAX_ENTANGLED_WIDTH {
                return Err(Error::validation("entangled-width", format!("k = {k} outside 1..={}", super::input::MAX_ENTANGLED_WIDTH)));
            }
            let amps = complex_list(field(o, "amps", "entangled")?, 1usize << k, "entangled amps")?;
            Ok(Block::Entangled { k, amps })
        }
        "magic" => Ok(Block::Magic),
        other => Err(schema(format!("unknown input block kind `{other}`"))),
    }
}

fn block_value(b: &Block) -> Value {
    match b {
        Block::Bits(bits) => json!({"kind": "bits", "value": bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect::<String>()}),
        Block::Product(states) => json!({
            "kind": "product",
            "states": states.iter().map(|s| json!([num(s[0].re), num(s[0].im), num(s[1].re), num(s[1].im)])).collect::<Vec<_>>(),
        }),
        Block::Entangled { k, amps } => json!({
            "kind": "entangled",
            "k": k,
            "amps": amps.iter().map(|z| cval(*z)).collect::<Vec<_>>(),
        }),
        Block::Magic => json!({"kind": "magic"}),
    }
}

fn guard_from(v: &Value) -> Result<Guard> {
    let o = as_obj(v, "guard")?;
    let ids: Vec<String> = as_arr(field(o, "ids", "guard")?, "guard ids")?
        .iter()
        .map(|x| as_str(x, "guard id").map(str::to_string))
        .collect::<Result<_>>()?;
    let parity = field(o, "parity", "guard")?.as_u64().filter(|p| *p <= 1).ok_or_else(|| schema("guard parity must be 0 or 1"))?;
    Ok(Guard::new(&ids, parity as u8))
}

fn instruction_from(v: &Value) -> Result<Instruction> {
    let o = as_obj(v, "instruction")?;
    let op = as_str(field(o, "op", "instruction")?, "op")?;
    match op {
        "gate" => {
            let line = as_line(field(o, "line", "gate")?, "gate line")?;
            let gate = match (o.get("angles"), o.get("matrix")) {
                (Some(a), None) => {
                    let arr = as_arr(a, "angles")?;
                    if arr.len() != 6 {
                        return Err(schema("angles: expected [alpha, beta, phi1, phi2, phi3, phi4]"));
                    }
                    let mut v6 = [0.0; 6];
                    for (slot, x) in v6.iter_mut().zip(arr) {
                        *slot = as_f64(x, "angle")?;
                    }
                    Matchgate::from_angles(MatchgateAngles::from_array(v6))
                }
                (None, Some(m)) => {
                    let mo = as_obj(m, "matrix")?;
                    let a = mat2_from(field(mo, "a", "matrix")?, "matrix a")?;
                    let b = mat2_from(field(mo, "b", "matrix")?, "matrix b")?;
                    Matchgate::from_components(a, b)?
                }
                _ => return Err(schema("gate needs exactly one of `angles` or `matrix`")),
            };
            let guard = o.get("guard").map(guard_from).transpose()?;
            Ok(Instruction::Gate { line, gate, guard })
        }
        "measure" => {
            let line = as_line(field(o, "line", "measure")?, "measure line")?;
            let id = as_str(field(o, "id", "measure")?, "measure id")?.to_string();
            let role = match as_str(field(o, "role", "measure")?, "role")? {
                "intermediate" => Role::Intermediate,
                "final" => Role::Final,
                other => return Err(schema(format!("unknown role `{other}`"))),
            };
            let basis = match o.get("basis") {
                None => Basis::Computational,
                Some(b) => {
                    let bo = as_obj(b, "basis")?;
                    match as_str(field(bo, "kind", "basis")?, "basis kind")? {
                        "computational" => Basis::Computational,
                        "tilted" => Basis::Tilted {
                            x: as_f64(field(bo, "x", "tilted basis")?, "x")?,
                            phase: as_f64(field(bo, "phase", "tilted basis")?, "phase")?,
                        },
                        other => return Err(schema(format!("unknown basis `{other}`"))),
                    }
                }
            };
            Ok(Instruction::Measure { line, id, role, basis })
        }
        "macro" => Ok(Instruction::Macro(macro_from(o)?)),
        other => Err(schema(format!("unknown op `{other}`"))),
    }
}

fn macro_from(o: &Map<String, Value>) -> Result<Macro> {
    let name = as_str(field(o, "name", "macro")?, "macro name")?;
    let line = |key: &str| as_line(field(o, key, name)?, name);
    Ok(match name {
        "swap_gadget" => Macro::Swap { line: line("line")? },
        "hadamard_gadget" => Macro::Hadamard { target: line("target")?, ancilla: line("ancilla")? },
        "single_qubit_unitary" => Macro::SingleQubit {
            target: line("target")?,
            ancilla: line("ancilla")?,
            u: mat2_from(field(o, "u", name)?, "u")?,
        },
        "two_qubit_unitary" => Macro::TwoQubit { line: line("line")?, u: mat4_from(field(o, "u", name)?, "u")? },
        "prepare_two_qubit_inputs" => {
            let states = as_arr(field(o, "states", name)?, "states")?
                .iter()
                .map(|s| {
                    let e = complex_list(s, 4, "pair state")?;
                    Ok([e[0], e[1], e[2], e[3]])
                })
                .collect::<Result<Vec<_>>>()?;
            Macro::PrepareTwoQubitInputs { line: line("line")?, states }
        }
        "toffoli" => {
            let cs = as_arr(field(o, "controls", name)?, "controls")?;
            if cs.len() != 2 {
                return Err(schema("toffoli: expected two controls"));
            }
            Macro::Toffoli {
                controls: [as_line(&cs[0], "control")?, as_line(&cs[1], "control")?],
                target: line("target")?,
                ancilla: line("ancilla")?,
            }
        }
        "fswap_ladder" => {
            let guard_ids = match o.get("guard_ids") {
                None => Vec::new(),
                Some(v) => as_arr(v, "guard_ids")?.iter().map(|x| as_str(x, "guard id").map(str::to_string)).collect::<Result<_>>()?,
            };
            Macro::FswapLadder { from: line("from")?, to: line("to")?, guard_ids }
        }
        "plus_state" => {
            let a = as_arr(field(o, "ancillas", name)?, "ancillas")?;
            if a.len() != 2 {
                return Err(schema("plus_state: expected two ancillas"));
            }
            Macro::PlusState {
                x: as_f64(field(o, "x", name)?, "x")?,
                ancillas: [as_line(&a[0], "ancilla")?, as_line(&a[1], "ancilla")?],
            }
        }
        other => return Err(schema(format!("unknown macro `{other}`"))),
    })
}

fn macro_value(m: &Macro) -> Value {
    let mut v = match m {
        Macro::Swap { line } => json!({"line": line_value(*line)}),
        Macro::Hadamard { target, ancilla } => json!({"target": line_value(*target), "ancilla": line_value(*ancilla)}),
        Macro::SingleQubit { target, ancilla, u } => {
            json!({"target": line_value(*target), "ancilla": line_value(*ancilla), "u": mat2_value(u)})
        }
        Macro::TwoQubit { line, u } => json!({"line": line_value(*line), "u": mat4_value(u)}),
        Macro::PrepareTwoQubitInputs { line, states } => json!({
            "line": line_value(*line),
            "states": states.iter().map(|s| Value::Array(s.iter().map(|z| cval(*z)).collect())).collect::<Vec<_>>(),
        }),
        Macro::Toffoli { controls, target, ancilla } => json!({
            "controls": [line_value(controls[0]), line_value(controls[1])],
            "target": line_value(*target),
            "ancilla": line_value(*ancilla),
        }),
        Macro::FswapLadder { from, to, guard_ids } => {
            let mut v = json!({"from": line_value(*from), "to": line_value(*to)});
            if !guard_ids.is_empty() {
                v["guard_ids"] = json!(guard_ids);
            }
            v
        }
        Macro::PlusState { x, ancillas } => json!({"x": num(*x), "ancillas": [line_value(ancillas[0]), line_value(ancillas[1])]}),
    };
    v["op"] = json!("macro");
    v["name"] = json!(m.name());
    v
}

fn instruction_value(ins: &Instruction) -> Value {
    match ins {
        Instruction::Gate { line, gate, guard } => {
            let mut v = json!({"op": "gate", "line": line_value(*line)});
            match gate.angles() {
                Some(a) => v["angles"] = Value::Array(a.as_array().iter().map(|x| num(*x)).collect()),
                None => v["matrix"] = json!({"a": mat2_value(gate.a()), "b": mat2_value(gate.b())}),
            }
            if let Some(g) = guard {
                v["guard"] = json!({"ids": g.ids(), "parity": g.parity()});
            }
            v
        }
        Instruction::Measure { line, id, role, basis } => json!({
            "op": "measure",
            "line": line_value(*line),
            "id": id,
            "role": match role { Role::Intermediate => "intermediate", Role::Final => "final" },
            "basis": match basis {
                Basis::Computational => json!({"kind": "computational"}),
                Basis::Tilted { x, phase } => json!({"kind": "tilted", "x": num(*x), "phase": num(*phase)}),
            },
        }),
        Instruction::Macro(m) => macro_value(m),
    }
}

pub fn circuit_to_value(c: &Circuit) -> Value {
    json!({
        "n": c.n(),
        "input": c.input().blocks().iter().map(block_value).collect::<Vec<_>>(),
        "program": c.program().iter().map(instruction_value).collect::<Vec<_>>(),
    })
}

pub fn circuit_from_value(v: &Value) -> Result<Circuit> {
    let o = as_obj(v, "circuit")?;
    let n = field(o, "n", "circuit")?.as_u64().ok_or_else(|| schema("n must be a non-negative integer"))? as usize;
    let blocks = as_arr(field(o, "input", "circuit")?, "input")?.iter().map(block_from).collect::<Result<Vec<_>>>()?;
    let input = InputSpec::new(blocks)?;
    if input.n() != n {
        return Err(Error::validation("block-widths", format!("input blocks cover {} lines but n = {n}", input.n())));
    }
    let program = as_arr(field(o, "program", "circuit")?, "program")?.iter().map(instruction_from).collect::<Result<Vec<_>>>()?;
    for ins in &program {
        let bad = match ins {
            Instruction::Gate { gate, .. } => gate.angles().is_some_and(|a| a.as_array().iter().any(|x| !x.is_finite())),
            _ => false,
        };
        if bad {
            return Err(Error::validation("finite", "angles must be finite"));
        }
    }
    Circuit::new(input, program)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let text = r#"{"n":1,"input":[{"kind":"bits","value":"0"}],
            "program":[{"op":"measure","line":1,"id":"x","role":"final","basis":{"kind":"computational"}}]}"#;
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.program().len(), 1);
        assert_eq!(c.final_records()[0].line, 0);
    }

    #[test]
    fn gate_on_line_n_rejected() {
        let text = r#"{"n":2,"input":[{"kind":"bits","value":"00"}],
            "program":[{"op":"gate","line":2,"angles":[0,0,0,0,0,0]}]}"#;
        assert!(matches!(parse_circuit(text), Err(Error::Validation { invariant: "nearest-neighbour", .. })));
    }

    #[test]
    fn syntax_error_position() {
        match parse_circuit("{\n  \"n\": 1,\n  oops\n}") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn keys_are_sorted() {
        let c = Circuit::new(InputSpec::zeros(2), vec![Instruction::gate(0, Matchgate::fswap()), Instruction::final_(1, "x")]).unwrap();
        let s = serialize_circuit(&c);
        assert!(s.starts_with(r#"{"input":[{"kind":"bits","value":"00"}],"n":2,"program":[{"line":1,"matrix":"#));
    }
}
