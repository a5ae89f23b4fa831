"""hsgen: deterministic assembly of FLAPW Hamiltonian/overlap matrices
from per-atom coefficient and coupling blocks, with a brute-force
reference oracle, a synthetic problem generator, per-kernel flop
accounting, and a tiled multi-worker executor."""

from .builder import (
    BuildOutput,
    CholeskySplit,
    SplitCounts,
    build_hs,
    build_phase1,
    build_phase2,
    build_s,
    h_cross,
)
from .executor import ExecPolicy, ExecResult, Tile, TileMap, plan_tiles, run_partitioned
from .kernels import (
    SECTIONS,
    FlopLedger,
    FlopRecord,
    KernelKind,
    diag_scale,
    flops_of,
    gemm,
    hemm_left,
    her2k,
    herk,
    potrf_lower,
    trmm_left_conjtrans,
)
from .matcore import (
    BlockStack,
    DimensionError,
    Dims,
    Fill,
    HermitianResult,
    InputError,
    InvariantError,
    as_cmatrix,
    frobenius,
    hermitian_mirror,
    is_hermitian,
    rel_frob_error,
    stack,
    zeros,
)
from .probgen import (
    PRESETS,
    Preset,
    ProblemInstance,
    ProblemSpec,
    generate,
    preset_dims,
    validate_instance,
)
from .reference import h_reference, s_reference
from .report import (
    HEAVY_SECTIONS,
    PEAK_GFLOPS_2GPU,
    PEAK_GFLOPS_CPU,
    TABLE5,
    FlopModelCheck,
    SectionReport,
    Table5Row,
    format_table,
    heavy_fraction,
    section_flops,
    summarize,
    validate_flop_model,
)
from .storage import (
    StorageError,
    load_instance,
    read_matrix,
    read_vector,
    save_instance,
    write_matrix,
    write_vector,
)

__version__ = "0.1.0"
