"""Error metrics, convergence-order estimation and simulation replay."""
from .frames import emit_frames
from .metrics import (ErrorReport, OrderIndeterminateError, ReferenceSolution,
                      boundary_errors, estimate_order)
from .rng import XorShift64Star
from .simulation import (CoarseGuess, FineChunk, IterationConnected,
                         SimulationTrace, event_batches, record_simulation)
