"""Strongly connected components (Tarjan), iterative to stay clear of the recursion limit."""

from typing import Dict, Hashable, List, Sequence

_ENTER, _NEXT, _RESUME = 0, 1, 2


def strongly_connected_components(successors: Dict[Hashable, Sequence[Hashable]]) -> List[List[Hashable]]:
    """Partition the nodes of ``successors`` into SCCs.

    Components come out in reverse topological order of the condensation
    (sinks first). Node order inside ``successors`` fixes the result.
    """
    index: Dict[Hashable, int] = {}
    lowlink: Dict[Hashable, int] = {}
    on_stack: Dict[Hashable, int] = {}
    stack: List[Hashable] = []
    components: List[List[Hashable]] = []
    counter = 0

    for start in successors:
        if start in index:
            continue
        work = [(start, 0, _ENTER, None)]
        while work:
            node, pos, phase, child = work.pop()
            if phase == _ENTER:
                counter += 1
                index[node] = lowlink[node] = counter
                on_stack[node] = len(stack)
                stack.append(node)
                work.append((node, 0, _NEXT, None))
            elif phase == _RESUME:
                lowlink[node] = min(lowlink[node], lowlink[child])
                work.append((node, pos + 1, _NEXT, None))
            else:
                succ = successors.get(node, ())
                if pos < len(succ):
                    target = succ[pos]
                    if target not in index:
                        work.append((node, pos, _RESUME, target))
                        work.append((target, 0, _ENTER, None))
                    else:
                        if target in on_stack:
                            lowlink[node] = min(lowlink[node], index[target])
                        work.append((node, pos + 1, _NEXT, None))
                elif lowlink[node] == index[node]:
                    cut = on_stack[node]
                    component = stack[cut:]
                    del stack[cut:]
                    for member in component:
                        del on_stack[member]
                    components.append(component)
    return components
