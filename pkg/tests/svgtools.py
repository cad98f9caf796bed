import re

_BAR = re.compile(r'<g id="bar_(\w)_(\w)_(train|test)">\s*<path d="([^"]+)"', re.S)


def bar_heights(svg_text):
    """{(sat, axis, split): height in SVG units} for every labelled bar."""
    out = {}
    for sat, axis, split, d in _BAR.findall(svg_text):
        ys = [float(v) for v in re.findall(r"[ML] [-\d.]+ ([-\d.]+)", d)]
        out[(sat, axis, split)] = max(ys) - min(ys)
    return out


def text_labels(svg_text):
    return re.findall(r"<text[^>]*>([^<]*)</text>", svg_text)
