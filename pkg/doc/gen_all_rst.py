import os
import re

SRC_ROOT = "mmloc"
RST_ROOT = "doc/source/modules"
SECTIONS = {"_core": "Implementation", "tools": "Command line tools"}
DESCRIPTION = re.compile(r"^# mmloc (.+)$", re.MULTILINE)


def title_of(path, modname):
    with open(path) as f:
        m = DESCRIPTION.search(f.read(2048))
    return f"{m.group(1)} ({modname})" if m else modname


def write_page(modname, title, options):
    rst_path = os.path.join(RST_ROOT, f"{modname}.rst")
    os.makedirs(RST_ROOT, exist_ok=True)
    with open(rst_path, "w") as f:
        f.write(f"{title}\n{'=' * len(title)}\n\n.. automodule:: {modname}\n")
        for opt in options:
            f.write(f"   :{opt}:\n")


def main():
    sections = {k: [] for k in SECTIONS}

    for sub in SECTIONS:
        pkg_dir = os.path.join(SRC_ROOT, sub)
        for fname in sorted(os.listdir(pkg_dir)):
            if not fname.endswith(".py") or fname.startswith("__"):
                continue
            modname = f"{SRC_ROOT}.{sub}.{fname[:-3]}"
            write_page(modname, title_of(os.path.join(pkg_dir, fname), modname), ("members", "undoc-members"))
            sections[sub].append(modname)

    # public API re-exported by the package
    write_page(SRC_ROOT, "Public API", ("members", "imported-members"))

    with open(os.path.join(RST_ROOT, "all_modules.rst"), "w") as f:
        f.write("API Reference\n=============\n\n.. toctree::\n   :maxdepth: 1\n\n   mmloc\n")
        for sub, caption in SECTIONS.items():
            f.write(f"\n.. toctree::\n   :maxdepth: 1\n   :caption: {caption}\n\n")
            for mod in sections[sub]:
                f.write(f"   {mod}\n")

    print(f"Generated {sum(len(v) for v in sections.values()) + 1} .rst files in {RST_ROOT}")


if __name__ == "__main__":
    main()
