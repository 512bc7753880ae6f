"""TinyFL message framework.

CBOR-serialized federated-learning messages with best/worst-case encoding
profiles, JSON and Protobuf parity codecs, the message-size benchmark and a
deterministic FL round simulator. The heavy lifting lives in the compiled
:mod:`tinyfl._tinyfl` extension; this package adds small conveniences.
"""

import json as _json

from ._tinyfl import (  # noqa: F401
    DecodeError,
    GlobalModelUpdate,
    LocalDataSetUpdate,
    LocalModelUpdate,
    ModelMetadata,
    ParseError,
    SchemaError,
    decode_dataset_update,
    decode_global,
    decode_local_model,
    encode_dataset_update,
    encode_global,
    encode_local_model,
    frame_count,
    json_decode_dataset_update,
    json_decode_global,
    json_decode_local_model,
    json_encode_dataset_update,
    json_encode_global,
    json_encode_local_model,
    lenet_standin_values,
    min_float_width,
    pb_decode_dataset_update,
    pb_decode_global,
    pb_decode_local_model,
    pb_encode_dataset_update,
    pb_encode_global,
    pb_encode_local_model,
    run_simulation_json,
    run_table1,
    run_table2,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["run_simulation"]


def run_simulation(**config):
    """Run the deterministic FL round simulation.

    Keyword arguments mirror the JSON config schema (num_clients,
    min_fraction, rounds, min_dataset_size, param_count, seed, profile,
    local_epochs, learning_rate, batch_size, multicast, drop_rate, ...).
    Returns the full report as a dict.
    """
    return _json.loads(run_simulation_json(_json.dumps(config)))
