"""Write the synthetic office-container fixtures under fixtures/.

The letters are invented; no real patient data. Zip entries use a fixed
timestamp so the files are reproducible.

    python tools/make_fixtures.py
"""

from __future__ import annotations

import io
import zipfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

NS = (
    'xmlns:office="http://openoffice.org/2000/office" '
    'xmlns:style="http://openoffice.org/2000/style" '
    'xmlns:text="http://openoffice.org/2000/text" '
    'xmlns:fo="http://www.w3.org/1999/XSL/Format" '
    'xmlns:draw="http://openoffice.org/2000/drawing" '
    'xmlns:svg="http://www.w3.org/2000/svg" '
    'xmlns:xlink="http://www.w3.org/1999/xlink"'
)

STYLES_XML = f"""<?xml version="1.0" encoding="UTF-8"?>
<office:document-styles {NS} office:version="1.0">
 <office:styles>
  <style:style style:name="Standard" style:family="paragraph"/>
  <style:style style:name="Heading" style:family="paragraph" style:parent-style-name="Standard">
   <style:properties fo:font-weight="bold"/>
  </style:style>
  <style:style style:name="Heading 1" style:family="paragraph" style:parent-style-name="Heading">
   <style:properties style:default-outline-level="1"/>
  </style:style>
  <style:style style:name="Kopfzeile" style:family="paragraph" style:parent-style-name="Heading"/>
  <style:style style:name="P1" style:family="paragraph">
   <style:properties fo:font-style="italic"/>
  </style:style>
 </office:styles>
</office:document-styles>
"""

# A tiny valid PNG (1x1, white).
PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d49484452000000010000000108020000009077"
    "53de0000000c4944415408d763f8ffff3f0005fe02fea7d6a4e60000000049454e44ae426082"
)

CML_CONTENT = f"""<?xml version="1.0" encoding="UTF-8"?>
<office:document-content {NS} office:class="text" office:version="1.0">
 <office:automatic-styles>
  <style:style style:name="P1" style:family="paragraph" style:parent-style-name="Kopfzeile"/>
  <style:style style:name="T1" style:family="text">
   <style:properties fo:font-weight="bold"/>
  </style:style>
  <style:style style:name="T2" style:family="text">
   <style:properties style:text-background-color="#FFFF00"/>
  </style:style>
  <style:style style:name="T3" style:family="text">
   <style:properties fo:background-color="#00ff00"/>
  </style:style>
 </office:automatic-styles>
 <office:body>
  <text:h text:style-name="Heading 1" text:level="1">Fall 7: Müdigkeit und Oberbauchschmerzen</text:h>
  <text:p text:style-name="P1">Einleitung:</text:p>
  <text:p text:style-name="Standard">Ein 54-jähriger Patient stellt sich in der hausärztlichen Sprechstunde vor.</text:p>
  <text:p text:style-name="P1">Anamnese:</text:p>
  <text:p text:style-name="Standard">Seit drei Monaten zunehmende Abgeschlagenheit, Nachtschweiß und ein Druckgefühl im linken Oberbauch.</text:p>
  <text:p text:style-name="Standard">Gewichtsverlust von 5 kg.</text:p>
  <text:p text:style-name="Standard"><text:span text:style-name="T1">Befund:</text:span> Tastbare <text:span text:style-name="T2">Splenomegalie</text:span> bis 6 cm unter dem Rippenbogen, Haut <text:span text:style-name="T3">blass</text:span>.</text:p>
  <text:p text:style-name="Standard"><draw:image draw:name="Sonographie Milz" xlink:href="#Pictures/milz.png" svg:width="4cm" svg:height="3cm"><svg:desc>Sonographie der Milz</svg:desc></draw:image></text:p>
  <text:p text:style-name="P1">Labor:</text:p>
  <text:p text:style-name="Standard">Leukozyten <text:span text:style-name="T2">85.000/µl</text:span>, Hb <text:span text:style-name="T3">10,2 g/dl</text:span>, Thrombozyten 410.000/µl.</text:p>
  <text:p text:style-name="Standard"><draw:image draw:name="Blutausstrich" xlink:href="#Pictures/milz.png"/></text:p>
  <text:p text:style-name="P1">Untersuchungen:</text:p>
  <text:unordered-list>
   <text:list-item><text:p>Sonographie Abdomen</text:p></text:list-item>
   <text:list-item><text:p>Differentialblutbild</text:p></text:list-item>
   <text:list-item><text:p>Knochenmarkpunktion</text:p></text:list-item>
  </text:unordered-list>
  <text:p text:style-name="P1">Diagnosen:</text:p>
  <text:unordered-list>
   <text:list-item><text:p><text:span text:style-name="T2">Chronische myeloische Leukämie</text:span></text:p>
    <text:unordered-list>
     <text:list-item><text:p>BCR-ABL positiv</text:p></text:list-item>
    </text:unordered-list>
   </text:list-item>
   <text:list-item><text:p><text:span text:style-name="T3">Anämie</text:span></text:p></text:list-item>
   <text:list-item><text:p>Chronische  myeloische Leukämie</text:p></text:list-item>
  </text:unordered-list>
  <text:p text:style-name="P1">Therapie:</text:p>
  <text:p text:style-name="Standard">Imatinib 400 mg/d<text:line-break/>Allopurinol 300 mg/d</text:p>
  <text:p text:style-name="P1">Epikrise:</text:p>
  <text:p text:style-name="Standard">Entlassung in gutem Allgemeinzustand; hämatologische Kontrolle in vier Wochen.</text:p>
 </office:body>
</office:document-content>
"""


def container(entries: dict[str, bytes]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, data in entries.items():
            info = zipfile.ZipInfo(name, date_time=(2005, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_STORED if name == "mimetype" else zipfile.ZIP_DEFLATED
            zf.writestr(info, data)
    return buf.getvalue()


def cml_letter() -> bytes:
    return container({
        "mimetype": b"application/vnd.sun.xml.writer",
        "content.xml": CML_CONTENT.encode("utf-8"),
        "styles.xml": STYLES_XML.encode("utf-8"),
        "Pictures/milz.png": PNG,
    })


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def colour_letter(
    sections: list[tuple[str, list[tuple[str, str | None]]]],
    diagnoses: list[tuple[str, str | None]],
) -> bytes:
    """A letter whose sections hold (text, colour) runs plus a Diagnosen list.

    ``None`` leaves a run or diagnosis uncoloured. Every distinct colour gets
    its own automatic text style, written exactly as given (case included).
    """
    colours = sorted({c for _, runs in sections for _, c in runs if c}
                     | {c for _, c in diagnoses if c})
    style_of = {c: f"C{i}" for i, c in enumerate(colours, start=1)}
    styles = "".join(
        f'<style:style style:name="{name}" style:family="text">'
        f'<style:properties style:text-background-color="{c}"/></style:style>'
        for c, name in style_of.items()
    )

    def run(text: str, colour: str | None) -> str:
        if colour is None:
            return _esc(text)
        return f'<text:span text:style-name="{style_of[colour]}">{_esc(text)}</text:span>'

    body = []
    for title, runs in sections:
        body.append(f'<text:p text:style-name="H">{_esc(title)}:</text:p>')
        body.append("<text:p>" + " ".join(run(t, c) for t, c in runs) + "</text:p>")
    body.append('<text:p text:style-name="H">Diagnosen:</text:p><text:unordered-list>')
    for name, colour in diagnoses:
        body.append(f"<text:list-item><text:p>{run(name, colour)}</text:p></text:list-item>")
    body.append("</text:unordered-list>")
    content = (
        f'<?xml version="1.0" encoding="UTF-8"?>\n<office:document-content {NS}>'
        f'<office:automatic-styles><style:style style:name="H" style:family="paragraph">'
        f'<style:properties fo:font-weight="bold"/></style:style>{styles}</office:automatic-styles>'
        f'<office:body>{"".join(body)}</office:body></office:document-content>'
    )
    return container({"mimetype": b"application/vnd.sun.xml.writer", "content.xml": content.encode("utf-8")})


TWO_COLOURS = (
    [("Befund", [("Tastbare", None), ("Splenomegalie", "#FFFF00"), ("und", None), ("blasse Haut", "#00ff00")])],
    [("Chronische myeloische Leukämie", "#ffff00"), ("Anämie", "#00FF00")],
)

DANGLING = (
    [("Befund", [("Ikterus", "#ff0000"), ("Splenomegalie", "#ffff00")])],
    [("Chronische myeloische Leukämie", "#ffff00"), ("Hepatitis", "#0000ff")],
)


def main() -> None:
    out = ROOT / "fixtures"
    out.mkdir(exist_ok=True)
    files = {
        "cml_letter.sxw": cml_letter(),
        "two_colors.sxw": colour_letter(*TWO_COLOURS),
        "dangling_color.sxw": colour_letter(*DANGLING),
    }
    for name, data in files.items():
        (out / name).write_bytes(data)
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
