import numpy as np
import configparser

from pathlib import Path

def recursive_grid(bounds, n_pts):
    """
    Recursively generates the n-dimensional grid points (extremes are included).

    Arguments:
        list-of-lists bounds: extremes for each dimension
        int n_pts:            number of points for each dimension

    Returns:
        np.ndarray: grid
        list: differential for each dimension
    """
    bounds = np.atleast_2d(bounds)
    n_pts  = np.atleast_1d(n_pts)
    if len(n_pts) == 1:
        n_pts = np.repeat(n_pts, len(bounds))
    if len(bounds) == 1:
        d  = np.linspace(bounds[0,0], bounds[0,1], n_pts[0])
        return np.atleast_2d(d).T, [d[1]-d[0]]
    grid_nm1, diff = recursive_grid(np.array(bounds)[1:], n_pts[1:])
    d = np.linspace(bounds[0,0], bounds[0,1], n_pts[0])
    diff.insert(0, d[1]-d[0])
    grid = []
    for di in d:
        for gi in grid_nm1:
            grid.append([di,*gi])
    return np.array(grid), diff

def random_triangles(n, rng = None, min_angle = 20., scale = (0.1, 10.)):
    """
    Random well-shaped triangles (every angle at least min_angle degrees), counter-clockwise, with random size, position and rotation.

    Arguments:
        int n:            number of triangles
        np.random.Generator rng: random number generator (default: seeded with 0)
        double min_angle: minimum angle in degrees
        tuple scale:      range of diameters

    Returns:
        np.ndarray: vertices (n, 3, 2)
    """
    if rng is None:
        rng = np.random.default_rng(0)
    min_angle = np.radians(min_angle)
    triangles = []
    while len(triangles) < n:
        # Two angles on the unit base, the third follows
        A, B = rng.uniform(min_angle, np.pi - 2*min_angle, size = 2)
        if np.pi - A - B < min_angle:
            continue
        # Apex from the law of sines
        b     = np.sin(B)/np.sin(A + B)
        apex  = b*np.array([np.cos(A), np.sin(A)])
        tri   = np.array([[0., 0.], [1., 0.], apex])
        theta = rng.uniform(0., 2*np.pi)
        R     = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        size  = rng.uniform(*scale)
        shift = rng.uniform(-10., 10., size = 2)
        triangles.append(size*tri @ R.T + shift)
    return np.array(triangles)

#-------------#
#   Options   #
#-------------#

def save_options(options, out_folder, name = None):
    """
    Saves options for the run (reproducibility)

    Arguments:
        optparser.Options or dict options: options
        str or Path out_folder:            folder where to save the option file
        str name:                          name of the run
    """
    if name is None:
        filename = 'options.ini'
    else:
        filename = 'options_{0}.ini'.format(name)
    if not isinstance(options, dict):
        options = vars(options)
    dd = {key:str(val) for (key, val) in options.items() if not key == 'config'}
    config = configparser.ConfigParser(interpolation = None)
    config.read_dict({'DEFAULT':dd})
    with open(Path(out_folder, filename), 'w') as f:
        config.write(f)

def load_options(opts, parser, args = None):
    """
    Loads options saved with save_options, command line values take precedence.

    Arguments:
        optparser.Options opts:       options object
        optparse.OptionParser parser: parser object
        list args:                    command line arguments (default: sys.argv)

    Returns:
        optparser.Options: options
    """
    config = configparser.ConfigParser(interpolation = None)
    config.read(opts.options)
    defaults = {}
    # Convert None and bools appropriately
    for (key, val) in config.defaults().items():
        if val == 'None':
            val = None
        elif val == 'True':
            val = True
        elif val == 'False':
            val = False
        defaults[key] = val
    parser.set_defaults(**defaults)
    opts, _ = parser.parse_args(args)
    return opts
