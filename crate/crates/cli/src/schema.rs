//! Published JSON Schemas for config files and run summaries.

use kreinlab::krein::REPORT_SCHEMA_VERSION;
use serde_json::{json, Value};

fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

fn number_or_null() -> Value {
    json!({"type": ["number", "null"]})
}

pub fn config_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "kreinlab/config",
        "title": "kreinlab run configuration",
        "type": "object",
        "required": ["experiment"],
        "additionalProperties": false,
        "properties": {
            "experiment": {"enum": ["gauge", "trace", "ssf", "pushnitski", "witten", "gmw", "commutator", "convergence", "all"]},
            "grid": {
                "type": "object",
                "required": ["length", "n"],
                "additionalProperties": false,
                "properties": {
                    "length": {"type": "number", "exclusiveMinimum": 0},
                    "n": {"type": "integer", "enum": powers_of_two(3, 14)}
                }
            },
            "potential": {
                "type": "object",
                "required": ["kind"],
                "additionalProperties": false,
                "properties": {
                    "kind": {"enum": ["gaussian", "sech2", "matrix_diag"]},
                    "amplitude": {"type": "number"},
                    "m": {"type": "integer", "minimum": 1},
                    "slot": {"type": "integer", "minimum": 0},
                    "diag": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                    "shape": {"enum": ["gaussian", "sech2"]}
                }
            },
            "switch": {
                "type": "object",
                "required": ["scale"],
                "additionalProperties": false,
                "properties": {"scale": {"type": "number", "exclusiveMinimum": 0}}
            },
            "z_list": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMaximum": 0}},
            "theta_angles": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": std::f64::consts::FRAC_PI_2}
            },
            "t_list": {"type": "array", "minItems": 1, "items": {"type": "number"}},
            "sizes": {"type": "array", "minItems": 2, "items": {"type": "integer", "enum": powers_of_two(3, 13)}},
            "spacing": {"type": "number", "exclusiveMinimum": 0},
            "cutoffs": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
            "fine_n": {"type": "integer", "enum": powers_of_two(6, 16)},
            "output_dir": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0}
        }
    })
}

pub fn report_schema() -> Value {
    let mut config = config_schema();
    if let Some(obj) = config.as_object_mut() {
        obj.remove("$schema");
        obj.remove("$id");
    }
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "kreinlab/summary",
        "title": "kreinlab run summary",
        "version": REPORT_SCHEMA_VERSION.to_string(),
        "type": "object",
        "required": ["schema_version", "tool_version", "timestamp", "pass", "config", "reports", "failures"],
        "additionalProperties": false,
        "properties": {
            "schema_version": {"const": REPORT_SCHEMA_VERSION},
            "tool_version": {"type": "string"},
            "timestamp": {"type": "string"},
            "pass": {"type": "boolean"},
            "config": {"$ref": "#/$defs/Config"},
            "reports": {"type": "array", "items": {"$ref": "#/$defs/TraceReport"}},
            "failures": {"type": "array", "items": {"type": "string"}}
        },
        "$defs": {
            "Config": config,
            "TraceReport": {
                "type": "object",
                "required": ["schema_version", "experiment", "inputs", "values", "measured", "prediction", "abs_err", "rel_err", "pass", "paper_anchor"],
                "additionalProperties": false,
                "properties": {
                    "schema_version": {"const": REPORT_SCHEMA_VERSION},
                    "experiment": {"type": "string"},
                    "inputs": {"type": "object"},
                    "values": {"type": "array", "items": {"$ref": "#/$defs/ValueRecord"}},
                    "measured": number_or_null(),
                    "prediction": number_or_null(),
                    "abs_err": number_or_null(),
                    "rel_err": number_or_null(),
                    "pass": {"type": "boolean"},
                    "paper_anchor": {"type": "string"},
                    "timestamp": {"type": ["string", "null"]}
                }
            },
            "ValueRecord": {
                "type": "object",
                "required": ["key", "measured", "prediction", "abs_err", "rel_err", "tolerance", "pass", "paper_anchor"],
                "additionalProperties": false,
                "properties": {
                    "key": {"type": "string"},
                    "gate": {"enum": ["close", "exceeds"]},
                    "measured": number_or_null(),
                    "prediction": number_or_null(),
                    "abs_err": number_or_null(),
                    "rel_err": number_or_null(),
                    "tolerance": {"type": "number", "minimum": 0},
                    "pass": {"type": "boolean"},
                    "paper_anchor": {"type": "string"}
                }
            }
        }
    })
}
