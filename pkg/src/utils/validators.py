from typing import Any, Dict, List

import jsonschema

_UNIT = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_POS_INT = {"type": "integer", "minimum": 1}


# JSON Schema for src/config/settings.yaml
SETTINGS_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["artmap", "criteria", "attention", "simulation", "output"],
    "properties": {
        "artmap": {
            "type": "object",
            "required": ["alpha", "beta", "epsilon", "rho_baseline", "match_rule"],
            "properties": {
                "alpha": _UNIT,
                "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "epsilon": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                "rho_baseline": {"type": "number", "minimum": 0, "maximum": 1},
                "match_rule": {"enum": ["ratio", "raw_activation"]},
            },
        },
        "criteria": {
            "type": "object",
            "required": ["psi1", "psi2", "psi3", "psi4", "psi5"],
            "properties": {
                "psi1": _UNIT,
                "psi2": _UNIT,
                "psi3": _UNIT,
                "psi4": _UNIT,
                "psi5": _UNIT,
                "buffer_len": _POS_INT,
                "relevance_window": _POS_INT,
                "similarity_fanout": _POS_INT,
                "label_request_min_support": _POS_INT,
            },
        },
        "attention": {
            "type": "object",
            "properties": {
                "association_radius": {"type": "number", "exclusiveMinimum": 0},
                "confidence_floor": {"type": "number", "minimum": 0, "maximum": 1},
                "max_age": {"type": "integer", "minimum": 0},
            },
        },
        "simulation": {
            "type": "object",
            "required": ["scenario", "seed"],
            "properties": {
                "scenario": {"type": "string", "minLength": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "experiments": {"type": "object"},
        "logging": {
            "type": "object",
            "properties": {"level": {"enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]}},
        },
        "output": {
            "type": "object",
            "required": ["dir"],
            "properties": {
                "dir": {"type": "string", "minLength": 1},
                "json_indent": {"type": "integer", "minimum": 0},
            },
        },
    },
}


_BLOCK_VALUE = {
    "oneOf": [
        {"type": "number", "minimum": 0, "maximum": 1},
        {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
    ]
}

# JSON Schema for simulator scenario files
SCENARIO_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["version", "feature_dim", "blocks", "sets"],
    "properties": {
        "version": {"const": 1},
        "feature_dim": _POS_INT,
        "blocks": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "integer", "minimum": 0},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "view_model": {
            "type": "object",
            "properties": {
                "reference_altitude": {"type": "number", "exclusiveMinimum": 0},
                "sigma_ground": {"type": "number", "minimum": 0},
                "sigma_aerial": {"type": "number", "minimum": 0},
                "rotation_mix": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "objectness": {
            "type": "object",
            "properties": {
                "mean_ground": {"type": "number", "minimum": 0, "maximum": 1},
                "mean_aerial": {"type": "number", "minimum": 0, "maximum": 1},
                "concentration": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "views": {
            "type": "object",
            "properties": {
                "ground_altitudes": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "aerial_altitudes": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "sets": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["label", "instances", "prototypes"],
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "supervised_index": {"type": ["integer", "null"], "minimum": 1},
                    "instances": {"type": "integer", "minimum": 0},
                    "instance_jitter": {"type": "number", "minimum": 0},
                    "prototypes": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "object", "additionalProperties": _BLOCK_VALUE},
                    },
                    "drift": {
                        "type": "object",
                        "properties": {
                            "blocks": {"type": "array", "items": {"type": "string"}},
                            "direction": {"type": "array", "items": {"type": "number"}},
                            "magnitude": {"type": "number", "minimum": 0},
                        },
                    },
                    "counts": {
                        "type": "object",
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                    "aerial_train_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
        "intersections": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "center", "members"],
                "properties": {
                    "id": {"type": "integer"},
                    "center": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "radius": {"type": "number", "minimum": 0},
                    "members": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "prefixItems": [{"type": "string"}, {"type": "integer", "minimum": 0}],
                            "minItems": 2,
                            "maxItems": 2,
                        },
                    },
                },
            },
        },
        "heights": {
            "type": "object",
            "properties": {
                "set": {"type": "string"},
                "instances": {"type": "integer", "minimum": 1},
                "seed_offset": {"type": "integer", "minimum": 0},
                "train_altitudes": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "eval_altitudes": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "train_per_altitude": {"type": "integer", "minimum": 0},
                "test_per_altitude": {"type": "integer", "minimum": 0},
            },
        },
    },
}


_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}

# JSON Schema for saved model snapshots
SNAPSHOT_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["format_version", "raw_dimension", "params", "criteria", "nodes", "registry", "clock"],
    "properties": {
        "format_version": {"type": "integer"},
        "raw_dimension": _POS_INT,
        "clock": {"type": "integer", "minimum": 0},
        "params": {
            "type": "object",
            "required": ["alpha", "beta", "epsilon", "rho_baseline", "match_rule"],
        },
        "criteria": {"type": "object", "required": ["psi1", "psi2", "psi3", "psi4", "psi5"]},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["weights", "label", "support", "created_frame"],
                "properties": {
                    "weights": _NUMBER_LIST,
                    "label": _POS_INT,
                    "support": {"type": "integer", "minimum": 0},
                    "created_frame": {"type": "integer", "minimum": 0},
                },
            },
        },
        "registry": {
            "type": "object",
            "required": ["classes"],
            "properties": {
                "classes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["index", "origin", "support_count", "created_frame", "active"],
                        "properties": {
                            "index": _POS_INT,
                            "origin": {"enum": ["supervised", "self_generated"]},
                            "human_label": {"type": ["string", "null"]},
                            "support_count": {"type": "integer", "minimum": 0},
                            "created_frame": {"type": "integer", "minimum": 0},
                            "active": {"type": "boolean"},
                        },
                    },
                },
            },
        },
    },
}


# JSON Schema for `label --map` files (YAML or JSON)
LABEL_MAP_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "properties": {
        "labels": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "classes"],
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "classes": {
                        "oneOf": [
                            {"const": "flagged"},
                            {"type": "array", "items": _POS_INT, "minItems": 1},
                        ]
                    },
                },
            },
        },
        "skip": {"type": "array", "items": _POS_INT},
    },
    "additionalProperties": False,
}


def _collect_errors(schema: Dict[str, Any], document: Any) -> List[str]:
    validator = jsonschema.Draft202012Validator(schema)
    errors = []
    for error in sorted(validator.iter_errors(document), key=lambda e: list(e.path)):
        location = "/".join(str(p) for p in error.path) or "<root>"
        errors.append(f"{location}: {error.message}")
    return errors


def validate_settings(config: Dict[str, Any]) -> List[str]:
    """Validate a settings mapping and return list of validation errors."""
    return _collect_errors(SETTINGS_SCHEMA, config)


def validate_scenario(document: Dict[str, Any]) -> List[str]:
    """Validate a scenario document and return list of validation errors."""
    errors = _collect_errors(SCENARIO_SCHEMA, document)
    if errors:
        return errors

    dim = document["feature_dim"]
    for name, (start, stop) in document["blocks"].items():
        if not 0 <= start < stop <= dim:
            errors.append(f"blocks/{name}: range [{start}, {stop}) outside feature_dim {dim}")
    for set_id, spec in document["sets"].items():
        for i, proto in enumerate(spec["prototypes"]):
            for block in proto:
                if block not in document["blocks"]:
                    errors.append(f"sets/{set_id}/prototypes/{i}: unknown block '{block}'")
        for block in spec.get("drift", {}).get("blocks", []):
            if block not in document["blocks"]:
                errors.append(f"sets/{set_id}/drift: unknown block '{block}'")
        direction = spec.get("drift", {}).get("direction")
        if direction is not None and len(direction) != dim:
            errors.append(f"sets/{set_id}/drift/direction: length {len(direction)} != {dim}")
    for inter in document.get("intersections", []):
        for set_id, instance in inter["members"]:
            spec = document["sets"].get(set_id)
            if spec is None:
                errors.append(f"intersections/{inter['id']}: unknown set '{set_id}'")
            elif instance >= spec["instances"]:
                errors.append(
                    f"intersections/{inter['id']}: instance {instance} of set '{set_id}' does not exist"
                )
    heights = document.get("heights")
    if heights and heights.get("set") not in document["sets"]:
        errors.append(f"heights/set: unknown set '{heights.get('set')}'")
    return errors


def validate_snapshot(document: Any) -> List[str]:
    """Validate a parsed model snapshot and return list of validation errors."""
    return _collect_errors(SNAPSHOT_SCHEMA, document)


def validate_label_map(document: Any) -> List[str]:
    """Validate a parsed label map and return list of validation errors."""
    return _collect_errors(LABEL_MAP_SCHEMA, document)
