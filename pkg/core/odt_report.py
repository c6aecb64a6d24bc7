"""
ODT Report Generator for Free Group Lab
Writes experiment sweeps and automaton analyses as ODT documents.
"""

import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

from odf.dc import Date, Title
from odf.opendocument import OpenDocumentText
from odf.style import ParagraphProperties, Style, TableCellProperties, TextProperties
from odf.table import Table, TableCell, TableColumn, TableRow
from odf.text import H, P, Span

from core.experiments import CSV_HEADER, ExperimentReport
from core.markov import (
    MarkovianAutomaton,
    SpectralSummary,
    ThresholdPredictions,
    format_probability,
)
from core.words import letter_char

log = logging.getLogger(__name__)


class ODTReportGenerator:
    """Generate ODT documents from experiment reports and automaton analyses"""

    @staticmethod
    def create_experiment_report(report: ExperimentReport, output_path: str) -> bool:
        """
        Generate an ODT document for a finished sweep.

        Args:
            report: Experiment report (rows and per-cell errors)
            output_path: Path to save the ODT file

        Returns:
            bool: True if generation was successful
        """
        try:
            config = report.config
            doc, styles = ODTReportGenerator._create_document(f"Experiment {config.name}")
            ODTReportGenerator._add_heading(doc, styles, f"Experiment: {config.name}", 1)
            ODTReportGenerator._add_fields(doc, styles, {
                "Automaton": config.automaton,
                "Length mode": config.length_mode,
                "Word mode": config.word_mode,
                "Trials per cell": config.trials,
                "Master seed": config.master_seed,
                "Wall time (ms)": f"{report.wall_ms:.0f}",
            })

            ODTReportGenerator._add_heading(doc, styles, "Results", 2)
            rows = [row.csv_fields() for row in report.rows]
            ODTReportGenerator._add_table(doc, styles, "Results", CSV_HEADER, rows)

            if report.errors:
                ODTReportGenerator._add_heading(doc, styles, "Errors", 2)
                err_rows = [
                    [str(e.cell), str(e.n), f"{e.size_mode}={e.size_param}", e.property or "(cell)",
                     e.kind, e.message]
                    for e in report.errors
                ]
                ODTReportGenerator._add_table(doc, styles, "Errors",
                                              ["cell", "n", "size", "property", "kind", "message"], err_rows)
            doc.save(output_path)
            return True
        except Exception as exc:
            log.warning("could not write ODT report %s: %s", output_path, exc)
            return False

    @staticmethod
    def create_automaton_report(automaton: MarkovianAutomaton, summary: SpectralSummary,
                                predictions: Optional[ThresholdPredictions], output_path: str) -> bool:
        """Generate an ODT document for one automaton analysis; True if successful"""
        try:
            doc, styles = ODTReportGenerator._create_document(f"Automaton {automaton.name}")
            ODTReportGenerator._add_heading(doc, styles, f"Automaton: {automaton.name}", 1)
            ODTReportGenerator._add_fields(doc, styles, {
                "Rank": automaton.rank,
                "States": len(automaton.states),
                "Transitions": len(automaton.transitions),
                "Irreducible": summary.irreducible,
                "Ergodic": summary.ergodic,
                "Period": summary.period if summary.period is not None else "-",
                "alpha_[2]": f"{summary.alpha2:.9g}",
                "alpha_[3]": f"{summary.alpha3:.9g}",
                "Degeneracy": _maybe(summary.degeneracy),
                "Cyclically reduced density": _maybe(summary.cyclic_density),
            })

            ODTReportGenerator._add_heading(doc, styles, "Transitions", 2)
            ODTReportGenerator._add_table(doc, styles, "Transitions", ["from", "letter", "to", "probability"], [
                [t.source, letter_char(t.letter), t.target, format_probability(t.probability)]
                for t in automaton.transitions
            ])

            if summary.stationary_by_state:
                ODTReportGenerator._add_heading(doc, styles, "Stationary distribution", 2)
                ODTReportGenerator._add_table(doc, styles, "Stationary", ["state", "mass"], [
                    [s, f"{m:.9g}"] for s, m in summary.stationary_by_state.items()
                ])

            ODTReportGenerator._add_heading(doc, styles, "Prefix-heavy parameters", 2)
            heavy_rows = []
            for params in (summary.prefix_heavy.cycles, summary.prefix_heavy.spectral):
                if params is not None:
                    heavy_rows.append([params.method, f"{params.C:.9g}", f"{params.alpha:.9g}"])
            if summary.prefix_heavy.cycles_error:
                heavy_rows.append(["cycles", "-", summary.prefix_heavy.cycles_error])
            ODTReportGenerator._add_table(doc, styles, "PrefixHeavy", ["method", "C", "alpha"], heavy_rows)

            if predictions is not None:
                ODTReportGenerator._add_heading(doc, styles, "Threshold predictions", 2)
                pred_rows = [[k, "alpha_[2]", format_probability(v)] for k, v in predictions.general.items()]
                for k, v in (predictions.uniform_sharp or {}).items():
                    pred_rows.append([k, "alpha", format_probability(v)])
                ODTReportGenerator._add_table(doc, styles, "Thresholds", ["property", "density unit", "critical"],
                                              pred_rows)
            doc.save(output_path)
            return True
        except Exception as exc:
            log.warning("could not write ODT report %s: %s", output_path, exc)
            return False

    # ===== DOCUMENT HELPERS =====

    @staticmethod
    def _create_document(title: str):
        """New text document with metadata and the styles the report uses"""
        doc = OpenDocumentText()
        doc.meta.addElement(Title(text=title))
        doc.meta.addElement(Date(text=datetime.now().strftime("%Y-%m-%dT%H:%M:%S")))

        styles = {}
        for level, size in ((1, "16pt"), (2, "13pt")):
            style = Style(name=f"Heading{level}", family="paragraph")
            style.addElement(TextProperties(fontsize=size, fontweight="bold"))
            style.addElement(ParagraphProperties(margintop="0.2in", marginbottom="0.08in"))
            doc.styles.addElement(style)
            styles[f"h{level}"] = style

        label = Style(name="FieldLabel", family="text")
        label.addElement(TextProperties(fontweight="bold"))
        doc.styles.addElement(label)
        styles["label"] = label

        cell = Style(name="Cell", family="table-cell")
        cell.addElement(TableCellProperties(border="0.5pt solid #000000", padding="0.03in"))
        doc.automaticstyles.addElement(cell)
        styles["cell"] = cell

        header = Style(name="HeaderText", family="paragraph")
        header.addElement(TextProperties(fontweight="bold", fontsize="9pt"))
        doc.automaticstyles.addElement(header)
        styles["header"] = header

        body = Style(name="CellText", family="paragraph")
        body.addElement(TextProperties(fontsize="9pt"))
        doc.automaticstyles.addElement(body)
        styles["body"] = body
        return doc, styles

    @staticmethod
    def _add_heading(doc, styles: Dict[str, Style], text: str, level: int):
        doc.text.addElement(H(outlinelevel=level, stylename=styles[f"h{level}"], text=text))

    @staticmethod
    def _add_fields(doc, styles: Dict[str, Style], fields: Dict[str, Any]):
        """One 'Label: value' paragraph per field"""
        for key, value in fields.items():
            p = P()
            p.addElement(Span(stylename=styles["label"], text=f"{key}: "))
            p.addText(str(value))
            doc.text.addElement(p)

    @staticmethod
    def _add_table(doc, styles: Dict[str, Style], name: str, header: Sequence[str],
                   rows: List[Sequence[str]]):
        table = Table(name=name)
        table.addElement(TableColumn(numbercolumnsrepeated=str(len(header))))
        for values, style in [(header, styles["header"])] + [(r, styles["body"]) for r in rows]:
            tr = TableRow()
            for value in values:
                tc = TableCell(valuetype="string", stylename=styles["cell"])
                tc.addElement(P(stylename=style, text=str(value)))
                tr.addElement(tc)
            table.addElement(tr)
        doc.text.addElement(table)


def _maybe(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.9g}"
