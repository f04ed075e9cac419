//! JSON wire formats for instances, allocations, fractional allocations and
//! lotteries.
//!
//! Goods are keyed `"g0"`, `"g1"`, ...; rationals are lowest-terms strings
//! (`"1/2"`, `"3"`). Serializers produce canonical output, so
//! `parse(serialize(x)) == x` and equal values print identically.

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Allocation, FractionalAllocation, Instance, Lottery, Rational};

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::input(format!("malformed JSON: {e}")))
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::input(format!("{what}: expected an object")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::input(format!("missing field \"{key}\"")))
}

fn count(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| Error::input(format!("\"{key}\": expected a non-negative integer")))
}

fn agent_index(v: &Value, n: usize, what: &str) -> Result<usize> {
    match v.as_u64().and_then(|x| usize::try_from(x).ok()) {
        Some(a) if a < n => Ok(a),
        _ => Err(Error::input(format!("{what}: {v} is not an agent index below {n}"))),
    }
}

pub fn good_key(g: usize) -> String {
    format!("g{g}")
}

fn parse_good_key(key: &str, m: usize) -> Result<usize> {
    let idx = key
        .strip_prefix('g')
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && (d == &"0" || !d.starts_with('0')))
        .and_then(|d| d.parse::<usize>().ok());
    match idx {
        Some(g) if g < m => Ok(g),
        _ => Err(Error::input(format!("\"{key}\" is not a good key g0..g{}", m.saturating_sub(1)))),
    }
}

pub fn format_rational(x: &Rational) -> String {
    // BigRational is kept reduced with a positive denominator
    x.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::input(format!("\"{s}\" is not a rational of the form p or p/q"));
    let parse_int = |t: &str| -> Result<BigInt> {
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse().map_err(|_| bad())
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::input(format!("\"{s}\": zero denominator")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
    }
}

fn rational_value(v: &Value, what: &str) -> Result<Rational> {
    let s = v.as_str().ok_or_else(|| Error::input(format!("{what}: expected a rational string")))?;
    parse_rational(s).map_err(|e| Error::input(format!("{what}: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

// instances

pub fn instance_from_json(v: &Value) -> Result<Instance> {
    let obj = object(v, "instance")?;
    let n = count(obj, "agents")?;
    let m = count(obj, "goods")?;
    let rows = field(obj, "valuations")?
        .as_array()
        .ok_or_else(|| Error::input("\"valuations\": expected an array of rows"))?;
    let mut matrix = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::input(format!("valuations[{i}]: expected an array")))?;
        let mut out = Vec::with_capacity(row.len());
        for (g, x) in row.iter().enumerate() {
            match x.as_u64() {
                Some(b @ (0 | 1)) => out.push(b as u8),
                _ => return Err(Error::input(format!("valuations[{i}][{g}]: entry {x} is not 0 or 1"))),
            }
        }
        matrix.push(out);
    }
    Instance::new(n, m, &matrix)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_json(&parse_json(text)?)
}

pub fn instance_to_json(instance: &Instance) -> Value {
    json!({
        "agents": instance.num_agents(),
        "goods": instance.num_goods(),
        "valuations": instance.rows(),
    })
}

pub fn serialize_instance(instance: &Instance) -> String {
    render(&instance_to_json(instance))
}

// deterministic allocations

/// `{"agents": n, "goods": m, "assignment": {"g0": 1, "g1": null}}`; every
/// good appears, `null` meaning unassigned.
pub fn allocation_to_json(alloc: &Allocation) -> Value {
    let assignment: Map<String, Value> = alloc
        .owners()
        .iter()
        .enumerate()
        .map(|(g, o)| (good_key(g), o.map_or(Value::Null, Value::from)))
        .collect();
    json!({
        "agents": alloc.num_agents(),
        "goods": alloc.num_goods(),
        "assignment": assignment,
    })
}

pub fn allocation_from_json(v: &Value) -> Result<Allocation> {
    let obj = object(v, "allocation")?;
    let n = count(obj, "agents")?;
    let m = count(obj, "goods")?;
    let assignment = object(field(obj, "assignment")?, "\"assignment\"")?;
    let mut owners: Vec<Option<Option<usize>>> = vec![None; m];
    for (key, owner) in assignment {
        let g = parse_good_key(key, m)?;
        owners[g] = Some(match owner {
            Value::Null => None,
            o => Some(agent_index(o, n, &format!("assignment.{key}"))?),
        });
    }
    let owners = owners
        .into_iter()
        .enumerate()
        .map(|(g, o)| o.ok_or_else(|| Error::input(format!("assignment: missing good {}", good_key(g)))))
        .collect::<Result<Vec<_>>>()?;
    Allocation::new(n, owners)
}

pub fn serialize_allocation(alloc: &Allocation) -> String {
    render(&allocation_to_json(alloc))
}

pub fn parse_allocation(text: &str) -> Result<Allocation> {
    allocation_from_json(&parse_json(text)?)
}

// fractional allocations

/// `{"agents": n, "goods": m, "shares": [{"g0": "1/2"}, ...]}`, one object per
/// agent listing only the nonzero shares.
pub fn fractional_to_json(frac: &FractionalAllocation) -> Value {
    let rows: Vec<Value> = (0..frac.num_agents())
        .map(|i| {
            let row: Map<String, Value> = (0..frac.num_goods())
                .filter(|&g| !frac.share(i, g).is_zero())
                .map(|g| (good_key(g), Value::from(format_rational(frac.share(i, g)))))
                .collect();
            Value::Object(row)
        })
        .collect();
    json!({
        "agents": frac.num_agents(),
        "goods": frac.num_goods(),
        "shares": rows,
    })
}

pub fn fractional_from_json(v: &Value) -> Result<FractionalAllocation> {
    let obj = object(v, "fractional allocation")?;
    let n = count(obj, "agents")?;
    let m = count(obj, "goods")?;
    let rows = field(obj, "shares")?
        .as_array()
        .ok_or_else(|| Error::input("\"shares\": expected an array of per-agent objects"))?;
    if rows.len() != n {
        return Err(Error::input(format!("\"shares\": {} rows for {n} agents", rows.len())));
    }
    let mut matrix = vec![vec![Rational::zero(); m]; n];
    for (i, row) in rows.iter().enumerate() {
        for (key, x) in object(row, &format!("shares[{i}]"))? {
            let g = parse_good_key(key, m)?;
            matrix[i][g] = rational_value(x, &format!("shares[{i}].{key}"))?;
        }
    }
    FractionalAllocation::new(n, m, matrix)
}

pub fn serialize_fractional(frac: &FractionalAllocation) -> String {
    render(&fractional_to_json(frac))
}

pub fn parse_fractional(text: &str) -> Result<FractionalAllocation> {
    fractional_from_json(&parse_json(text)?)
}

// lotteries

pub fn lottery_to_json(lottery: &Lottery) -> Value {
    let support: Vec<Value> = lottery
        .support()
        .iter()
        .map(|(p, a)| json!({ "probability": format_rational(p), "allocation": allocation_to_json(a) }))
        .collect();
    json!({ "support": support })
}

pub fn lottery_from_json(v: &Value) -> Result<Lottery> {
    let obj = object(v, "lottery")?;
    let support = field(obj, "support")?
        .as_array()
        .ok_or_else(|| Error::input("\"support\": expected an array"))?;
    let mut entries = Vec::with_capacity(support.len());
    for (k, entry) in support.iter().enumerate() {
        let e = object(entry, &format!("support[{k}]"))?;
        let p = rational_value(field(e, "probability")?, &format!("support[{k}].probability"))?;
        let a = allocation_from_json(field(e, "allocation")?)
            .map_err(|err| Error::input(format!("support[{k}].allocation: {err}")))?;
        entries.push((p, a));
    }
    Lottery::new(entries)
}

pub fn serialize_lottery(lottery: &Lottery) -> String {
    render(&lottery_to_json(lottery))
}

pub fn parse_lottery(text: &str) -> Result<Lottery> {
    lottery_from_json(&parse_json(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::fractional_mnw;
    use crate::lottery::decompose;
    use crate::model::rat;
    use proptest::prelude::*;

    #[test]
    fn instance_examples() {
        let i = parse_instance(r#"{"agents":2,"goods":2,"valuations":[[1,0],[1,0]]}"#).unwrap();
        assert_eq!(i.rows(), vec![vec![1, 0], vec![1, 0]]);
        let e = parse_instance(r#"{"agents":1,"goods":0,"valuations":[[]]}"#).unwrap();
        assert_eq!(e.num_goods(), 0);
        let err = parse_instance(r#"{"agents":1,"goods":1,"valuations":[[2]]}"#).unwrap_err();
        assert!(err.is_input());
        assert!(err.to_string().contains("valuations[0][0]"));
        assert!(parse_instance(r#"{"agents":2,"goods":1,"valuations":[[1]]}"#).unwrap_err().is_input());
        assert!(parse_instance("{not json").unwrap_err().is_input());
        assert!(parse_instance(r#"{"agents":1,"goods":1,"valuations":[[true]]}"#).unwrap_err().is_input());
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(format_rational(&rat(1, 2)), "1/2");
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&rat(3, 1)), "3");
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        for bad in ["", "1/0", "a", "1/2/3", "1.5", "+1", "1/"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn point_mass_lottery_document() {
        let a = Allocation::new(1, vec![Some(0)]).unwrap();
        let v = lottery_to_json(&Lottery::point_mass(a));
        assert_eq!(v["support"][0]["probability"], "1");
        assert_eq!(v["support"][0]["allocation"]["assignment"]["g0"], 0);
    }

    #[test]
    fn allocation_requires_every_good() {
        let text = r#"{"agents":2,"goods":2,"assignment":{"g0":1}}"#;
        assert!(parse_allocation(text).unwrap_err().to_string().contains("g1"));
        let text = r#"{"agents":2,"goods":2,"assignment":{"g0":1,"g1":2}}"#;
        assert!(parse_allocation(text).is_err());
        let text = r#"{"agents":2,"goods":2,"assignment":{"g0":1,"g01":null}}"#;
        assert!(parse_allocation(text).is_err());
    }

    fn instances() -> impl Strategy<Value = Instance> {
        (1usize..4, 0usize..5).prop_flat_map(|(n, m)| {
            proptest::collection::vec(proptest::collection::vec(0u8..2, m), n)
                .prop_map(move |rows| Instance::new(n, m, &rows).unwrap())
        })
    }

    proptest! {
        #[test]
        fn round_trips(inst in instances()) {
            prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst.clone());

            let a = crate::det::mnw_tie(&inst);
            let text = serialize_allocation(&a);
            prop_assert_eq!(parse_allocation(&text).unwrap(), a);

            let f = fractional_mnw(&inst).allocation;
            let text = serialize_fractional(&f);
            let back = parse_fractional(&text).unwrap();
            prop_assert_eq!(serialize_fractional(&back), text);
            prop_assert_eq!(back, f.clone());

            let l = decompose(&inst, &f).unwrap();
            let text = serialize_lottery(&l);
            let back = parse_lottery(&text).unwrap();
            prop_assert_eq!(serialize_lottery(&back), text);
            prop_assert_eq!(back, l);
        }
    }
}
