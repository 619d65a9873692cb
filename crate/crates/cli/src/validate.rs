//! Minimal JSON Schema checker for the schemas this crate publishes.
//!
//! Supported keywords: `$ref` (local `#/$defs/...`), `type`, `enum`,
//! `const`, `properties`, `required`, `additionalProperties: false`,
//! `items`, `minItems`, `minimum`, `exclusiveMinimum`, `exclusiveMaximum`.

use serde_json::Value;

/// Validate `instance` against `root`. Each error is prefixed with the JSON
/// pointer of the offending value.
pub fn validate(root: &Value, instance: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(root, root, instance, "", &mut errors);
    errors
}

fn resolve<'a>(root: &'a Value, reference: &str) -> Option<&'a Value> {
    root.pointer(reference.strip_prefix('#')?)
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        _ => false,
    }
}

fn at(path: &str) -> &str {
    if path.is_empty() {
        "/"
    } else {
        path
    }
}

fn check(root: &Value, schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(s) = schema.as_object() else { return };
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        match resolve(root, r) {
            Some(target) => check(root, target, v, path, errors),
            None => errors.push(format!("{}: unresolved reference {r}", at(path))),
        }
    }
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(name) => type_matches(name, v),
            Value::Array(names) => names.iter().filter_map(Value::as_str).any(|n| type_matches(n, v)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{}: expected type {t}, found {v}", at(path)));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errors.push(format!("{}: expected {c}, found {v}", at(path)));
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            let list: Vec<String> = options.iter().map(Value::to_string).collect();
            errors.push(format!("{}: {v} is not one of [{}]", at(path), list.join(", ")));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(lo) = s.get("minimum").and_then(Value::as_f64) {
            if x < lo {
                errors.push(format!("{}: {x} is below the minimum {lo}", at(path)));
            }
        }
        if let Some(lo) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= lo {
                errors.push(format!("{}: {x} must be greater than {lo}", at(path)));
            }
        }
        if let Some(hi) = s.get("exclusiveMaximum").and_then(Value::as_f64) {
            if x >= hi {
                errors.push(format!("{}: {x} must be less than {hi}", at(path)));
            }
        }
    }
    if let Value::Object(map) = v {
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(Value::Array(req)) = s.get("required") {
            for key in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(key) {
                    errors.push(format!("{}: missing required property `{key}`", at(path)));
                }
            }
        }
        for (key, value) in map {
            let child = format!("{path}/{key}");
            match props.and_then(|p| p.get(key)) {
                Some(sub) => check(root, sub, value, &child, errors),
                None => {
                    if s.get("additionalProperties") == Some(&Value::Bool(false)) {
                        errors.push(format!("{}: unknown property `{key}`", at(path)));
                    }
                }
            }
        }
    }
    if let Value::Array(items) = v {
        if let Some(min) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                errors.push(format!("{}: needs at least {min} items, found {}", at(path), items.len()));
            }
        }
        if let Some(sub) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, sub, item, &format!("{path}/{i}"), errors);
            }
        }
    }
}
