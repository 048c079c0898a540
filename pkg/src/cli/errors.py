from __future__ import annotations

# CLI error messages

ERR_INVALID_LITERAL = "Invalid literal: {err}"
ERR_CONGRUENCE = "Dold congruence violated at n={n} (residue {residue})"
ERR_NOT_PRIMITIVE = "Construction failed: {err}"
ERR_REFINEMENT = "Winding not certified: {err}"
ERR_DISAGREEMENT = "Index mismatch at n={n}: numeric={numeric} combinatorial={combinatorial} target={target}"

ERR_WORD_CHECK = "{check} failed at n={n}: {word} (position {position})"
ERR_MAP_DUMP = "Bad map dump: {err}"
ERR_FILE_NOT_FOUND = "File not found: {path}"
ERR_INVALID_CONFIG = "Invalid arguments: {err}"
