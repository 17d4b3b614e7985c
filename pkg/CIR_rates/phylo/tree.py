"""
Rooted trees with branch lengths, read from and written to Newick.
"""
import logging
import math
import re

from ..checker import ParseError, ValidationError

logger = logging.getLogger(__name__)

NUMBER = re.compile(r'[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?')
SPECIAL = set("()[]:;,'")


class Node:
    def __init__(self, name='', length=0.0, parent=None):
        self.name = name
        self.length = length  # of the branch above the node
        self.parent = parent
        self.children = []

    @property
    def is_leaf(self):
        return not self.children

    def __repr__(self):
        return f'Node({self.name!r}, {self.length}, {len(self.children)} children)'


class Tree:
    def __init__(self, root):
        self.root = root

    def preorder(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def postorder(self):
        return reversed(list(_reverse_preorder(self.root)))

    @property
    def leaves(self):
        return [x for x in self.preorder() if x.is_leaf]

    @property
    def leaf_names(self):
        return [x.name for x in self.leaves]

    @property
    def n_leaves(self):
        return len(self.leaves)

    def is_three_taxa_star(self):
        """root with exactly three leaf children on positive branches"""
        children = self.root.children
        return len(children) == 3 and all(x.is_leaf and x.length > 0 for x in children)

    def scaled(self, factor):
        """copy of the tree with every branch length multiplied by factor"""
        return parse_newick(to_newick(self, factor))

    def __repr__(self):
        return f'Tree({to_newick(self)})'


def _reverse_preorder(root):
    # parents before children, children right to left; reversed it is a postorder
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children)


class _NewickReader:
    def __init__(self, text):
        self.text = text
        self.i = 0
        self.names = {}

    def error(self, message, offset=None):
        return ParseError(message, self.i if offset is None else offset)

    def peek(self):
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ''

    def skip(self):
        """whitespace and [comments]"""
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch.isspace():
                self.i += 1
            elif ch == '[':
                end = self.text.find(']', self.i)
                if end < 0:
                    raise self.error('unterminated comment')
                self.i = end + 1
            else:
                break

    def read(self):
        root = self.subtree(None)
        if self.peek() == ')':
            raise self.error('unbalanced parentheses')
        if self.peek() != ';':
            raise self.error("missing ';'")
        self.i += 1
        if self.peek():
            raise self.error("unexpected text after ';'")
        return Tree(root)

    def subtree(self, parent):
        node = Node(parent=parent)
        if self.peek() == '(':
            self.i += 1
            while True:
                node.children.append(self.subtree(node))
                ch = self.peek()
                if ch == ',':
                    self.i += 1
                elif ch == ')':
                    self.i += 1
                    break
                elif not ch or ch == ';':
                    raise self.error('unbalanced parentheses')
                else:
                    raise self.error(f"expected ',' or ')', got {ch!r}")
        start = self.i
        node.name = self.label()
        if node.is_leaf:
            if not node.name:
                raise self.error('leaf without a label', start)
            if node.name in self.names:
                raise self.error(f'duplicate leaf label {node.name!r}', start)
            self.names[node.name] = start
        if self.peek() == ':':
            self.i += 1
            node.length = self.length()
        elif parent is not None:
            raise self.error('missing branch length')
        return node

    def label(self):
        self.skip()
        if self.i < len(self.text) and self.text[self.i] == "'":
            chars = []
            self.i += 1
            while True:
                end = self.text.find("'", self.i)
                if end < 0:
                    raise self.error('unterminated quoted label')
                chars.append(self.text[self.i:end])
                self.i = end + 1
                if self.text[self.i:self.i + 1] == "'":
                    chars.append("'")
                    self.i += 1
                else:
                    return ''.join(chars)
        start = self.i
        while self.i < len(self.text) and self.text[self.i] not in SPECIAL and not self.text[self.i].isspace():
            self.i += 1
        return self.text[start:self.i]

    def length(self):
        self.skip()
        match = NUMBER.match(self.text, self.i)
        if match is None:
            raise self.error('missing branch length')
        value = float(match.group())
        if not math.isfinite(value) or value < 0:
            raise self.error(f'branch length must be finite and nonnegative, got {value}')
        self.i = match.end()
        return value


def parse_newick(text):
    """
    Read a Newick tree; every branch below the root needs a length

    :param str text: e.g. "((A:0.1,B:0.2):0.05,C:0.3);"
    :rtype: Tree
    """
    tree = _NewickReader(str(text)).read()
    logger.debug(f'read a tree with {tree.n_leaves} leaves')
    return tree


def _quote(name):
    if name and not any(ch in SPECIAL or ch.isspace() for ch in name):
        return name
    return "'" + name.replace("'", "''") + "'"


def to_newick(tree, factor=1.0):
    """Newick string with lengths written as shortest round-trip decimals"""
    if factor < 0:
        raise ValidationError(f'scale factor must be nonnegative, got {factor}')

    def write(node):
        text = ''
        if node.children:
            text = '(' + ','.join(write(x) for x in node.children) + ')'
        text += _quote(node.name) if node.name or node.is_leaf else ''
        if node.parent is not None:
            text += ':' + repr(float(node.length * factor))
        return text

    return write(tree.root) + ';'
