"""Built-in opponent enumerators for diagonalization runs.

Each adversary implements the enumeration-source protocol
new_elements(e, stage, view): the elements it enumerates at `stage`,
given read access to the public trace through the previous stage (it
never sees the selector's future or the current stage's rules).
"""

from __future__ import annotations

from .diagonal import SINGLE


class Silent:
    """Never enumerates anything."""

    name = "silent"

    def new_elements(self, e, stage, view):
        return []


class TrapSpringer:
    """Enumerates one element (the first) of each gap its strategy issued
    one stage earlier, read off the trace."""

    name = "trap-springer"

    def new_elements(self, e, stage, view):
        if stage == 0:
            return []
        return sorted({r.gap_lo for r in view.rules_issued_at(stage - 1, e)})


class CautiousCopier:
    """Tracks the victim: enumerates everything definitely inside the
    functional's value under the current approximation (the union of both
    sides in pair mode), staying clear of every gap on its path."""

    name = "cautious-copier"

    def new_elements(self, e, stage, view):
        approx = view.approx(e)
        if approx is None:
            return []
        out = []
        for block in range(view.defined_through + 1):
            lo, hi = 1 << block, 1 << (block + 1)
            if view.mode == SINGLE:
                excl = view.x_table.excluded_interval(block, approx)
                cut = excl[0] if excl else hi
            else:
                ex = view.x_table.excluded_interval(block, approx[0])
                ey = view.y_table.excluded_interval(block, approx[1])
                if ex is None or ey is None:
                    cut = hi  # one side keeps the whole block in the union
                else:
                    cut = max(ex[0], ey[0])
            out.extend(range(lo, cut))
        return out


class PrefixFlooder:
    """Enumerates the whole prefix [0, 2^stage) at each stage.  Since 0 is
    never in a functional's value, its strategy tree empties at the first
    level computation."""

    name = "prefix-flooder"

    def new_elements(self, e, stage, view):
        return range(0, 1 << stage)


CATALOG = {
    Silent.name: Silent,
    TrapSpringer.name: TrapSpringer,
    CautiousCopier.name: CautiousCopier,
    PrefixFlooder.name: PrefixFlooder,
}
