import csv
import json
import dill
import h5py
import warnings
import numpy as np

from pathlib import Path

from wgfem.mesh import Mesh
from wgfem.weak_gradient import WgSpace, WeakFunction
from wgfem.exceptions import MeshError, WGException

supported_extensions = ['json', 'pkl', 'h5']

#--------------#
#  Mesh files  #
#--------------#

def _decode(data, source):
    try:
        return data.decode('utf-8')
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b'\n') + 1
        raise MeshError("Invalid UTF-8 byte at offset {0}".format(e.start), line = line, source = source) from e

def _read_text(source, name = None):
    if isinstance(source, bytes):
        return _decode(source, name)
    if isinstance(source, str):
        return source
    if hasattr(source, 'read'):
        text = source.read()
        return _decode(text, name) if isinstance(text, bytes) else text
    raise MeshError("Unsupported mesh source {0}".format(type(source).__name__))

def _records(text):
    """
    Non-empty lines without comments, with their 1-based line number.
    """
    for i, line in enumerate(text.splitlines()):
        line = line.split('#', 1)[0].strip()
        if line != '':
            yield i+1, line.split()

def _numbers(fields, kind, line, source):
    try:
        return [kind(f) for f in fields]
    except ValueError:
        raise MeshError("Cannot parse '{0}' as {1} values".format(' '.join(fields), 'integer' if kind is int else 'numeric'), line = line, source = source)

def _parse_nodes(records, source):
    try:
        line, header = next(records)
    except StopIteration:
        raise MeshError("Empty node section", source = source)
    header = _numbers(header, int, line, source)
    if len(header) not in (4, 5):
        raise MeshError("Node header must be 'count dim attributes markers [base]'", line = line, source = source)
    n, dim, n_attr, n_mark = header[:4]
    if dim != 2:
        raise MeshError("Only 2D meshes are supported, got dimension {0}".format(dim), line = line, source = source)
    if n < 3:
        raise MeshError("At least three vertices are required, got {0}".format(n), line = line, source = source)
    base     = header[4] if len(header) == 5 else None
    vertices = np.zeros((n, 2))
    for i in range(n):
        try:
            line, fields = next(records)
        except StopIteration:
            raise MeshError("Expected {0} vertices, found {1}".format(n, i), source = source)
        if len(fields) != 3 + n_attr + min(n_mark, 1):
            raise MeshError("Vertex line must have {0} fields, got {1}".format(3 + n_attr + min(n_mark, 1), len(fields)), line = line, source = source)
        label = _numbers(fields[:1], int, line, source)[0]
        if base is None:
            # Triangle convention: the first label sets the index base
            base = label
        if base not in (0, 1):
            raise MeshError("Index base must be 0 or 1, got {0}".format(base), line = line, source = source)
        if label != base + i:
            raise MeshError("Vertex label {0} out of sequence (expected {1})".format(label, base + i), line = line, source = source)
        vertices[i] = _numbers(fields[1:3], float, line, source)
    return vertices, base, line

def _parse_elements(records, n_vertices, base, source):
    try:
        line, header = next(records)
    except StopIteration:
        raise MeshError("Empty element section", source = source)
    header = _numbers(header, int, line, source)
    if len(header) < 2 or len(header) > 3:
        raise MeshError("Element header must be 'count nodes_per_triangle [attributes]'", line = line, source = source)
    n, nodes = header[:2]
    n_attr   = header[2] if len(header) == 3 else 0
    if nodes != 3:
        raise MeshError("Only linear triangles (3 nodes) are supported, got {0}".format(nodes), line = line, source = source)
    if n < 1:
        raise MeshError("At least one triangle is required", line = line, source = source)
    triangles = np.zeros((n, 3), dtype = np.int64)
    seen      = {}
    for i in range(n):
        try:
            line, fields = next(records)
        except StopIteration:
            raise MeshError("Expected {0} triangles, found {1}".format(n, i), source = source)
        if len(fields) != 4 + n_attr:
            raise MeshError("Triangle line must have {0} fields, got {1}".format(4 + n_attr, len(fields)), line = line, source = source)
        idx = np.array(_numbers(fields[1:4], int, line, source)) - base
        if np.any(idx < 0) or np.any(idx >= n_vertices):
            bad = int(idx[(idx < 0) | (idx >= n_vertices)][0]) + base
            raise MeshError("Dangling vertex index {0}".format(bad), line = line, source = source)
        if len(set(idx)) < 3:
            raise MeshError("Triangle with repeated vertex", line = line, source = source)
        key = tuple(sorted(idx))
        if key in seen:
            raise MeshError("Duplicate triangle (same vertices as line {0})".format(seen[key]), line = line, source = source)
        seen[key] = line
        triangles[i] = idx
    return triangles

def load_mesh(source, ele = None, fmt = 'node-ele', name = None, ele_name = None):
    """
    Reads a mesh in Triangle's node/ele plain-text format.
    Node section: header 'count 2 attributes markers [base]', then 'label x y [attributes] [marker]'; without an
    explicit base the first label sets it (0 or 1). Element section: header 'count 3 [attributes]', then
    'label v0 v1 v2 [attributes]'. '#' starts a comment. Clockwise triangles are reordered counter-clockwise;
    edges are derived, never read.

    Arguments:
        str, bytes or file source: node section, or node and element sections in one stream
        str, bytes or file ele:    element section, if separate
        str fmt:                   format ('node-ele')
        str name:                  name of the (node) source, for error messages
        str ele_name:              name of the element source, for error messages

    Returns:
        Mesh: mesh
    """
    if fmt != 'node-ele':
        raise MeshError("Unsupported mesh format {0}".format(fmt))
    node_src = name if name is not None else 'node'
    records  = _records(_read_text(source, node_src))
    vertices, base, _ = _parse_nodes(records, node_src)
    if ele is None:
        triangles = _parse_elements(records, len(vertices), base, node_src)
        if next(records, None) is not None:
            warnings.warn("Trailing lines after the element section of {0} are ignored".format(node_src))
    else:
        ele_src   = ele_name if ele_name is not None else 'ele'
        triangles = _parse_elements(_records(_read_text(ele, ele_src)), len(vertices), base, ele_src)
    # Orientation repair
    p     = vertices[triangles]
    area  = (p[:, 1, 0] - p[:, 0, 0])*(p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0])*(p[:, 1, 1] - p[:, 0, 1])
    cw    = area < 0.
    triangles[cw] = triangles[cw][:, [0, 2, 1]]
    return Mesh(vertices, triangles)

def _mesh_paths(path):
    path = Path(path)
    if path.suffix in ('.node', '.ele'):
        path = path.with_suffix('')
    return Path(str(path)+'.node'), Path(str(path)+'.ele')

def read_mesh(path):
    """
    Reads <stem>.node and <stem>.ele.

    Arguments:
        str or Path path: stem, or either of the two files

    Returns:
        Mesh: mesh
    """
    node, ele = _mesh_paths(path)
    for file in (node, ele):
        if not file.is_file():
            raise MeshError("Mesh file {0} not found".format(file))
    with open(node, 'rb') as fn, open(ele, 'rb') as fe:
        return load_mesh(fn, fe, name = str(node), ele_name = str(ele))

def write_mesh(mesh, path):
    """
    Writes <stem>.node and <stem>.ele (0-based labels, no attributes or markers).
    """
    node, ele = _mesh_paths(path)
    with open(node, 'w') as f:
        f.write('{0} 2 0 0\n'.format(mesh.n_vertices))
        for i, (x, y) in enumerate(mesh.vertices):
            f.write('{0} {1!r} {2!r}\n'.format(i, float(x), float(y)))
    with open(ele, 'w') as f:
        f.write('{0} 3 0\n'.format(mesh.n_triangles))
        for i, (a, b, c) in enumerate(mesh.triangles):
            f.write('{0} {1} {2} {3}\n'.format(i, a, b, c))

#--------------#
#   Solutions  #
#--------------#

def _solution_dict(u_h):
    return {'space':    u_h.space.summary(),
            'mesh':     {'vertices': u_h.mesh.vertices, 'triangles': u_h.mesh.triangles, 'edges': u_h.mesh.edges},
            'dof_map':  {'dofs': u_h.n_dofs, 'interior_dofs': u_h.interior.size, 'edge_dofs': u_h.edges.size,
                         'layout': 'interior blocks by triangle, then edge blocks by edge (Legendre, low to high vertex)'},
            'interior': u_h.interior,
            'edges':    u_h.edges,
            'residual': u_h.residual,
            }

def _from_dict(d):
    space = d['space']
    mesh  = Mesh(np.asarray(d['mesh']['vertices'], dtype = np.float64), np.asarray(d['mesh']['triangles'], dtype = np.int64))
    space = WgSpace(int(space['j']), str(space['family']), q_boost = int(space['q_boost']))
    u_h   = WeakFunction(space, mesh, np.concatenate((np.asarray(d['interior'], dtype = np.float64).ravel(), np.asarray(d['edges'], dtype = np.float64).ravel())))
    u_h.residual = None if d.get('residual') is None else float(d['residual'])
    return u_h

def to_builtin(value):
    """
    Recursively converts numpy containers and scalars into JSON-serialisable python objects.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(val) for val in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value

def save_json(data, path):
    """
    Writes a JSON document (fixed key order, so identical data give identical files).
    """
    with open(Path(path), 'w') as f:
        json.dump(to_builtin(data), f, indent = 2)
        f.write('\n')

def save_csv(columns, rows, path):
    with open(Path(path), 'w', newline = '') as f:
        writer = csv.writer(f, lineterminator = '\n')
        writer.writerow(columns)
        writer.writerows(rows)

def save_solution(u_h, folder = '.', name = 'solution', ext = 'json'):
    """
    Exports a discrete solution (mesh, space, dof map metadata and coefficient blocks).

    Arguments:
        WeakFunction u_h:   solution
        str or Path folder: output folder
        str name:           file name without extension
        str ext:            'json', 'pkl' (dill) or 'h5' (h5py)

    Returns:
        Path: written file
    """
    if ext not in supported_extensions:
        raise WGException("Extension {0} is not supported. Valid extensions are json, pkl or h5.".format(ext))
    file = Path(folder, name+'.'+ext)
    d    = _solution_dict(u_h)
    if ext == 'json':
        save_json(d, file)
    elif ext == 'pkl':
        with open(file, 'wb') as f:
            dill.dump(d, f)
    else:
        with h5py.File(file, 'w') as f:
            f.attrs['j']       = u_h.space.j
            f.attrs['family']  = u_h.space.family
            f.attrs['q_boost'] = u_h.space.q_boost
            if u_h.residual is not None:
                f.attrs['residual'] = u_h.residual
            f.create_dataset('vertices', data = u_h.mesh.vertices)
            f.create_dataset('triangles', data = u_h.mesh.triangles)
            f.create_dataset('interior', data = u_h.interior)
            f.create_dataset('edges', data = u_h.edges)
    return file

def _load_h5(file):
    with h5py.File(file, 'r') as f:
        return {'space':    {'j': f.attrs['j'], 'family': f.attrs['family'], 'q_boost': f.attrs['q_boost']},
                'mesh':     {'vertices': f['vertices'][()], 'triangles': f['triangles'][()]},
                'interior': f['interior'][()],
                'edges':    f['edges'][()],
                'residual': f.attrs['residual'] if 'residual' in f.attrs else None,
                }

def load_solution(path):
    """
    Loads a solution written by save_solution. If the file is missing, the other supported extensions are tried.

    Arguments:
        str or Path path: solution file

    Returns:
        WeakFunction: solution
    """
    file = Path(path)
    candidates = [file] + [file.with_suffix('.'+ext) for ext in supported_extensions if '.'+ext != file.suffix]
    for cand in candidates:
        if not cand.is_file():
            continue
        if cand.suffix == '.json':
            with open(cand, 'r') as f:
                return _from_dict(json.load(f))
        if cand.suffix == '.pkl':
            with open(cand, 'rb') as f:
                return _from_dict(dill.load(f))
        if cand.suffix == '.h5':
            d = _load_h5(cand)
            if isinstance(d['space']['family'], bytes):
                d['space']['family'] = d['space']['family'].decode()
            return _from_dict(d)
    raise WGException("{0} not found. Please provide it or re-run the solver.".format(file.name))
