"""Virtual data center embedding: fat-tree substrates, an exact batch solver,
an online local-search embedder, and a discrete-event simulator around them."""

__version__ = "0.1.0"

from .topology import (  # noqa: F401
    ResourceVector,
    SubstrateNetwork,
    VdcRequest,
    WorkloadConfig,
    build_fat_tree,
    generate_vdc_request,
    validate_substrate,
)
