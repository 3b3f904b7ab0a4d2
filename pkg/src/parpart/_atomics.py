"""Atomic primitives on int64 numpy arrays, usable inside nogil jitted kernels.

numba ships atomics for CUDA only; on the CPU we lower straight to LLVM's
``cmpxchg`` and ``atomic_rmw`` instructions via intrinsics. Monotonic ordering
is enough everywhere these are used: the protected quantities (cluster weights,
visit marks, queue cursors, hash-slot claims) carry no release/acquire payload
of their own.
"""

from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic

__all__ = ["cas", "fetch_add", "try_mark"]


@intrinsic
def _cas_i64(typingctx, arr_t, idx_t, expected_t, new_t):
    if not (isinstance(arr_t, types.Array) and arr_t.dtype == types.int64):
        return None
    sig = types.boolean(arr_t, types.intp, types.int64, types.int64)

    def codegen(context, builder, signature, args):
        arr_v, idx_v, exp_v, new_v = args
        ary = context.make_array(signature.args[0])(context, builder, arr_v)
        ptr = cgutils.get_item_pointer(
            context, builder, signature.args[0], ary, (idx_v,)
        )
        pair = builder.cmpxchg(ptr, exp_v, new_v, "monotonic", "monotonic")
        return builder.extract_value(pair, 1)

    return sig, codegen


@intrinsic
def _fetch_add_i64(typingctx, arr_t, idx_t, val_t):
    if not (isinstance(arr_t, types.Array) and arr_t.dtype == types.int64):
        return None
    sig = types.int64(arr_t, types.intp, types.int64)

    def codegen(context, builder, signature, args):
        arr_v, idx_v, val_v = args
        ary = context.make_array(signature.args[0])(context, builder, arr_v)
        ptr = cgutils.get_item_pointer(
            context, builder, signature.args[0], ary, (idx_v,)
        )
        return builder.atomic_rmw("add", ptr, val_v, "monotonic")

    return sig, codegen


@njit(cache=True, nogil=True)
def cas(arr, idx, expected, new):
    """Atomically set arr[idx] to new iff it equals expected. True on success."""
    return _cas_i64(arr, idx, expected, new)


@njit(cache=True, nogil=True)
def fetch_add(arr, idx, val):
    """Atomically add val to arr[idx]; returns the value before the add."""
    return _fetch_add_i64(arr, idx, val)


@njit(cache=True, nogil=True)
def try_mark(arr, idx):
    """Test-and-set arr[idx] from 0 to 1. True iff this call won the bit."""
    return _cas_i64(arr, idx, 0, 1)
