"""Link-level simulation of expurgated PPM over dispersive optical channels."""

from eppm.codes import (
    BadParams,
    Codebook,
    DesignParams,
    NoDesignFound,
    NotADifferenceSet,
    build_codebook,
    catalog_codebook,
    complement_codebook,
    find_difference_set,
    load_catalog,
    papr,
)

__version__ = "0.1.0"
