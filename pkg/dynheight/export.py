"""CSV files for grids, measures and tables, with gnuplot companion scripts"""
import csv
import os

FORMAT = '{:.12g}'

POTENTIAL_FIELDS = ['chart', 'i', 'j', 're', 'im', 'u']
MEASURE_FIELDS = ['re', 'im', 'density']

_PLOTS = {
    'potential': ("set view map\nset size ratio -1\n"
                  "splot '{data}' using 4:5:($1 == 0 ? $6 : 1/0) with points palette pointsize 0.3 title 'u'\n"),
    'measure': ("set size ratio -1\n"
                "plot '{data}' using 1:2:3 with points palette pointsize 0.3 title 'density'\n"),
    'table': "plot '{data}' using 1:2 with linespoints title '{title}'\n",
}

def _number(value):
    return FORMAT.format(value) if isinstance(value, float) else value

def write_rows(path, fieldnames, rows):
    """Write dicts as a CSV file with a header line"""
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _number(value) for key, value in row.items()})

def write_potential(path, potential):
    mesh = potential.mesh()
    rows = ({'chart': chart, 'i': i, 'j': j, 're': float(mesh[i, j].real), 'im': float(mesh[i, j].imag),
             'u': float(values[i, j])}
            for chart, values in enumerate(potential.values)
            for i in range(potential.resolution) for j in range(potential.resolution))
    write_rows(path, POTENTIAL_FIELDS, rows)

def write_measure(path, measure, spacing):
    """Per-node density of a grid measure; the atom at infinity is left out"""
    density = measure.density(spacing)
    rows = ({'re': float(z.real), 'im': float(z.imag), 'density': float(rho)}
            for z, rho in zip(measure.points, density) if abs(z) != float('inf'))
    write_rows(path, MEASURE_FIELDS, rows)

def write_table(path, fieldnames, rows):
    """Rows given as sequences in the order of fieldnames"""
    write_rows(path, fieldnames, (dict(zip(fieldnames, row)) for row in rows))

def write_gnuplot_script(data_path, kind, title=''):
    """gnuplot script next to a CSV file; returns the script path"""
    script_path = os.path.splitext(data_path)[0] + '.gp'
    with open(script_path, 'w') as f:
        f.write("set datafile separator ','\nset key autotitle columnhead\n")
        f.write(_PLOTS[kind].format(data=os.path.basename(data_path), title=title))
    return script_path
