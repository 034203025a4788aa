"""Class hierarchy over the loaded class set.

Names of unloaded classes (library supertypes, external targets) still
participate: a loaded class's declared super chain extends into them,
but they are leaves since their own supertypes are unknown.
"""

from __future__ import annotations

from .classfile import ClassArtifact


class ClassHierarchy:
    def __init__(self, classes) -> None:
        self._parents: dict[str, tuple[str | None, tuple[str, ...]]] = {}
        self._children: dict[str, list[str]] = {}
        self._loaded: dict[str, ClassArtifact] = {}
        for art in classes:
            self._loaded[art.name] = art
            self._parents[art.name] = (art.super_name, art.interfaces)
            for parent in ((art.super_name,) if art.super_name else ()) + art.interfaces:
                self._children.setdefault(parent, []).append(art.name)
        for kids in self._children.values():
            kids.sort()

    def is_loaded(self, name: str) -> bool:
        return name in self._loaded

    def artifact(self, name: str) -> ClassArtifact | None:
        return self._loaded.get(name)

    def supertypes(self, name: str) -> list[str]:
        """The class itself plus every reachable declared supertype,
        in breadth-first order (superclass before interfaces)."""
        out: list[str] = []
        seen: set[str] = set()
        queue = [name]
        while queue:
            cur = queue.pop(0)
            if cur in seen:
                continue
            seen.add(cur)
            out.append(cur)
            parents = self._parents.get(cur)
            if parents is None:
                continue  # unloaded: a leaf from our point of view
            super_name, interfaces = parents
            if super_name:
                queue.append(super_name)
            queue.extend(interfaces)
        return out

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes(sub)

    def subtypes(self, name: str) -> list[str]:
        """All loaded transitive subtypes, sorted, excluding name itself."""
        out: list[str] = []
        seen: set[str] = set()
        queue = list(self._children.get(name, ()))
        while queue:
            cur = queue.pop(0)
            if cur in seen:
                continue
            seen.add(cur)
            out.append(cur)
            queue.extend(self._children.get(cur, ()))
        return sorted(out)

    def find_method(self, class_name: str, name: str,
                    param_types: tuple[str, ...]):
        """Resolve (name, params) against class_name walking up loaded
        superclasses; returns the MethodBody or None."""
        for cls in self.supertypes(class_name):
            art = self._loaded.get(cls)
            if art is None:
                continue
            for body in art.methods:
                if body.ref.name == name and body.ref.param_types == param_types:
                    return body
        return None
