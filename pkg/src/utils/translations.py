VARIANT_RU = {
    "egomotion": {
        "homography": "🎥 Гомографии + диффузия эгодвижения",
        "se3": "🧭 Позы SE(3) + диффузия эгодвижения",
        "constant-last": "⏸ Без диффузии эгодвижения (w/o ED)",
        "none": "🚫 Без эгодвижения",
    },
    "modality": {
        "waypoint": "📍 Траектория",
        "+image": "🖼 + изображения",
        "+text": "💬 + текстовый запрос",
        "+point_cloud": "☁️ + облако точек",
    },
}

PREDICTOR_RU = {
    "model": "🤖 Модель",
    "cvh": "➡️ CVH",
    "constant": "📌 Постоянная позиция",
    "oracle": "🎯 Оракул",
}


def tr_variant(sweep: str | None, value: str | None) -> str:
    """Преобразует вариант абляции в читаемый вид."""
    if not value:
        return "—"
    return VARIANT_RU.get(sweep or "", {}).get(value, value)


def tr_predictor(value: str | None) -> str:
    """Преобразует имя предиктора в читаемый вид."""
    if not value:
        return "—"
    return PREDICTOR_RU.get(value, value)
