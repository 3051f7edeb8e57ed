# One summary line per acceptance criterion, printed by conftest at the end.
LINES = []
